# ---------- CONFIG ----------
RESULTS_ROOT = "_uq_results"  # Default results root for experiments and benchmarks
SEED_ENV_VAR = "KORALI_SEED"  # Overrides the experiment file's Random Seed
WORKER_ID_ENV_VAR = "KORALI_WORKER_ID"  # Exposed to Concurrent-mode child processes
RESULTS_ROOT_ENV_VAR = "UQ_RESULTS_ROOT"  # Default root shown by the results viewer page
