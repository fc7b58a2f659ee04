"""Numerics for the (q,t)-deformed extended Gelfand-Tsetlin chain."""

from .qcalc import Precision, QPair, gen_pochhammer, qpoch_finite, qpoch_infinite, qintegral
from .shapes import DoubleSignature, Partition, Signature, branching_psi, interlace_double, interlace_sig
from .lattice import Configuration, InfiniteConfiguration, Params
from .macdonald import MacdonaldBank, eval, eval_config, eval_infinite
from .kernels import (
    KernelRow,
    extended_kernel_row,
    kernel_compose,
    kernel_general,
    kernel_row,
    kernel_row_float,
    kernel_special,
    r_function,
)
from .chain import PathSample, boundary_table, gibbs_weight, make_rng, moment, sample_path
from .verify import CheckReport, run_manifest

__all__ = [
    "CheckReport",
    "Configuration",
    "DoubleSignature",
    "InfiniteConfiguration",
    "KernelRow",
    "MacdonaldBank",
    "Params",
    "Partition",
    "PathSample",
    "Precision",
    "QPair",
    "Signature",
    "boundary_table",
    "branching_psi",
    "eval",
    "eval_config",
    "eval_infinite",
    "extended_kernel_row",
    "gen_pochhammer",
    "gibbs_weight",
    "interlace_double",
    "interlace_sig",
    "kernel_compose",
    "kernel_general",
    "kernel_row",
    "kernel_row_float",
    "kernel_special",
    "make_rng",
    "moment",
    "qintegral",
    "qpoch_finite",
    "qpoch_infinite",
    "r_function",
    "run_manifest",
    "sample_path",
]
