"""Workbench for Toeplitz-Cuntz-Krieger families of finite (colored) directed graphs."""

__version__ = "0.1.0"

from .dilate import (  # noqa: E402
    DilationCertificate,
    colored_full_ck_dilation,
    compression_certificate,
    full_ck_dilation,
    one_step_dilation,
)
from .family import (  # noqa: E402
    OperatorFamily,
    build_cycle_exact,
    build_fock,
    build_pi_v,
    build_rho_infty,
    conjugate,
    direct_sum,
    inflate,
    restrict,
)
from .graph import Graph, Path, enumerate_paths, select_tails  # noqa: E402
from .staralg import AlgElement, normal_form, parse_element  # noqa: E402
from .verify import check_tck, commutant_dimension, singular_vertices  # noqa: E402
from .wold import max_full_ck_subspace, wold_decompose  # noqa: E402
