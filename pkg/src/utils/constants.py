"""
Constants and default solver settings
All rates and frequencies are in units of the decay rate gamma
"""

# Integrator
DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
DEFAULT_METHOD = 'DOP853'  # embedded RK 8(5,3) with dense output

# Period grid
DEFAULT_GRID = 512
MAX_GRID = 8192
GRID_CONVERGENCE_TOL = 1e-8
DEFAULT_M_MAX = 16

# Linear algebra
MAX_EIGENVECTOR_CONDITION = 1e10
ILL_CONDITIONED_RESOLVENT = 1e8  # cond(1 - O(T)) above this is logged
DENSE_LIMIT = 64  # reduced dimension above which the Krylov path is used
GMRES_RTOL = 1e-12
GMRES_MAX_ITER = 400

# Oracle
ORACLE_DECAY_EXPONENT = 40.0
ORACLE_EXTRA_PERIODS = 5
ORACLE_MAX_PERIODS = 1_000_000

# Density-matrix diagnostics
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-8
ENTROPY_CLIP = 1e-10
NEGATIVE_EIGENVALUE_LIMIT = 1e-6

# Kerr truncation
DEFAULT_N_MAX = 48
TRUNCATION_STEP = 8
TRUNCATION_CAP = 160
TRUNCATION_TOL = 1e-8

# Nominal period used for fully static protocols
STATIC_PERIOD = 1.0

# Weak-power precondition f << |gamma - i delta|
WEAK_POWER_RATIO = 0.1

# Flux below this fraction of f counts as vanishing in g2 denominators
VANISHING_FLUX = 1e-12

# Model kinds
MODEL_QUBIT = 'qubit'
MODEL_LAMBDA = 'lambda'
MODEL_KERR = 'kerr'

# Waveform kinds
WAVEFORM_CONSTANT = 'constant'
WAVEFORM_COSINE = 'cosine'
WAVEFORM_OFFSET_COSINE = 'offset_cosine'
WAVEFORM_KINDS = (WAVEFORM_CONSTANT, WAVEFORM_COSINE, WAVEFORM_OFFSET_COSINE)

# Observables supported per model
COMMON_OUTPUTS = ('state', 'floquet', 'gamma_min', 'adiabatic', 'high_frequency', 'static_scan')
SUPPORTED_OUTPUTS = {
    MODEL_QUBIT: COMMON_OUTPUTS + (
        'reflection', 'fluxes', 'elastic_spectrum', 'spectrum', 'g1', 'g2', 'weak_power'
    ),
    MODEL_LAMBDA: COMMON_OUTPUTS + ('reflection', 'fluxes', 'elastic_spectrum'),
    MODEL_KERR: COMMON_OUTPUTS + ('occupation', 'entropy', 'hysteresis'),
}

# CSV formatting
CSV_FLOAT_FORMAT = '{:.17g}'
MANIFEST_NAME = 'manifest.yaml'
