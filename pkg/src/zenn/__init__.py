"""Zeta neural networks: frequency-scaled shallow and deep regressors, tangent kernels and cumulants."""

from .activations import Activation, activation_eval
from .architectures import VARIANTS, ImageModelSpec, build_image_model
from .charfn import charfn_mc, charfn_relu_uniform, relu_uniform_family
from .convergence import TailReport, convergence_tail
from .cumulants import (
    CumulantReport,
    KStatistics,
    cumulant_report,
    excess_kurtosis,
    k_statistics,
    mlp_cumulant_scaling,
    network_cumulant_mc,
    perceptron_cumulant,
    perceptron_cumulant_function,
    perceptron_cumulant_mc,
    zenn_cumulant_series,
)
from .data import ImageDataset, load_jena_csv, load_ppm, random_split, save_ppm, synth1d, synth_target
from .deep import DeepModel, model_backward, model_forward
from .exceptions import (
    ConfigError,
    DimensionError,
    ModelDimensionError,
    ModelFormatError,
    ModelVersionError,
    TrainingDivergedError,
)
from .initialization import Constant, InitSpec, Normal, ShallowArch, Uniform, init_model, sample_outputs
from .kernel import (
    KernelMatrix,
    empirical_gram,
    feature_probe,
    gronwall_diagnostic,
    jacobi_eigenvalues,
    smallest_eigenvalue,
    tangent_kernel,
    zentk_eval,
    zentk_gram,
)
from .layers import (
    Concat,
    Dense,
    FourierFeatures,
    KAZeNNEdge,
    OZeNN,
    RadZeNN,
    RandoZeNN,
    layer_backward,
    layer_forward,
)
from .networks import (
    NeuronParams,
    ShallowMLP,
    ShallowZeNN,
    mlp_backward,
    mlp_forward,
    zenn_backward,
    zenn_forward,
)
from .serialization import deserialize_model, load_model, save_model, serialize_model
from .training import Dataset, TrainConfig, TrainTrace, loss, mse, psnr, residual_evolution_check, train_gd

__version__ = "0.1.0"
