#pragma once

#include <cstddef>
#include <functional>

#include "steinkit/cli/config.hpp"
#include "steinkit/cli/report.hpp"

namespace steinkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;

/// Runs task(i) for i < count on a pool of `threads` workers (0: hardware
/// concurrency). Each index runs exactly once; exceptions are rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

// Each builds the report without writing it; the run_* wrappers also emit it
// and return the exit code.
Report er_report(const ExperimentConfig& config);
Report jack_report(const ExperimentConfig& config);
Report verify_suite(const ExperimentConfig& config);
Report recursion_report(const ExperimentConfig& config);
Report hyp_report(const ExperimentConfig& config);

int run_er_report(const ExperimentConfig& config);
int run_jack_report(const ExperimentConfig& config);
int run_verify_suite(const ExperimentConfig& config);
int run_recursion(const ExperimentConfig& config);
int run_hyp(const ExperimentConfig& config);

/// Dispatches on config.command.
int run(const ExperimentConfig& config);

}  // namespace steinkit::cli
