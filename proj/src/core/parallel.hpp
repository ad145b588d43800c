#pragma once

namespace svr::core {

// Execution mode for the compute kernels. The serial path is the reference
// implementation; the OpenMP path must produce identical results and is
// checked against it in the tests and the benchmark tool.
enum class ExecMode { serial, openmp };

ExecMode exec_mode();
void set_exec_mode(ExecMode m);

// Number of worker threads the OpenMP path would use right now.
int thread_count();

// Force single-threaded execution (serial mode and OMP thread cap of 1).
void force_single_thread();

}  // namespace svr::core
