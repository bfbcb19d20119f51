"""Minimal dense-array autodiff: float32 tensors, define-by-run tape,
and the interpolation primitives the codec and renderer are built on."""

from .tensor import ContractViolation, Tape, Tensor, active_tape, as_tensor
from .ops import (add, sub, mul, div, neg, exp, log, sqrt, absval, clamp,
                  relu, gelu, softplus, matmul, reshape, transpose, concat,
                  narrow, sum_, mean_, conv2d, avg_pool2, upsample2_bilinear)
from .sampling import (plane_bicubic, bilinear_wrap, vec_linear, trilinear3,
                       window_matrix)
from .serialize import (save_tensor, load_tensor, save_container,
                        load_container, tensor_to_bytes, tensor_from_bytes)

__all__ = [
    "ContractViolation", "Tape", "Tensor", "active_tape", "as_tensor",
    "add", "sub", "mul", "div", "neg", "exp", "log", "sqrt", "absval",
    "clamp", "relu", "gelu", "softplus", "matmul", "reshape", "transpose",
    "concat", "narrow", "sum_", "mean_", "conv2d", "avg_pool2",
    "upsample2_bilinear", "plane_bicubic", "bilinear_wrap", "vec_linear",
    "trilinear3", "window_matrix", "save_tensor", "load_tensor",
    "save_container", "load_container", "tensor_to_bytes", "tensor_from_bytes",
]
