"""Default tolerances and run settings, kept in one place."""

# spd
RECONSTRUCTION_RTOL = 1e-10
INVERSE_ATOL = 1e-8

# pdcomp
COMPLETION_TOL = 1e-10
COMPLETION_MAX_SWEEPS = 500

# sampler
CACHE_AUDIT_EVERY = 10_000
CACHE_AUDIT_ATOL = 1e-6
BATCH_MEANS_BATCHES = 50

# default run settings (desk-scale gene-expression configuration)
DEFAULT_DELTA = 1.0
DEFAULT_D_SCALE = 50.0
DEFAULT_BLOCK_SIZE = 20
DEFAULT_BLOCKS_PER_ITER = 7
DEFAULT_C = 1.0 / 35.0
DEFAULT_ITERATIONS = 1_000_000
DEFAULT_BURN_IN = 100_000
