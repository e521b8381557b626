#pragma once

#include "config.hpp"
#include "output.hpp"

#include <cstddef>

namespace fracpme::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitHypothesis = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitInternal = 4;
inline constexpr int kExitUsage = 64;

struct KernelsArgs {
    bool sonine_check = false;
    double sonine_tol = 1e-6;
    std::size_t points = 30;
    bool weights = false;
    bool soe = false;
};

int run_solve(const RunConfig& cfg, OutputDir& out);
int run_cascade(const RunConfig& cfg, OutputDir& out);
int run_verify(const RunConfig& cfg, OutputDir& out);
int run_kernels(const RunConfig& cfg, const KernelsArgs& args, OutputDir& out);
int run_convergence(const RunConfig& cfg, OutputDir& out);

}  // namespace fracpme::cli
