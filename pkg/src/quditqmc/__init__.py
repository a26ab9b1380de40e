"""Qudit state-vector simulation and density-matrix kernel density estimation / classification."""

from .circuits import (
    DegenerateSampleError,
    PredictionResult,
    build_dmkdc_circuit,
    build_dmkde_circuit,
    dmkdc_predict,
    dmkde_predict,
    predict_batch,
)
from .density import (
    DensityError,
    DensityModel,
    SpectralDecomposition,
    build_density_matrix,
    expectation_oracle,
    fit,
    spectral_decompose,
    synthesize_u_lambda,
)
from .features import RffMap, SoftmaxMap, make_anchor_grid
from .modelio import load_model, save_model
from .sim import (
    Circuit,
    ControlledUnitary,
    GeneralizedControlledPower,
    QuditState,
    ShiftPower,
    Unitary,
    init_register,
    measure_probabilities,
    run_circuit,
    sample_measurement,
)

__version__ = "0.1.0"
