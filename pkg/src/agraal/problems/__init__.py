"""Problem builders for the experiment families."""

from .affine import make_affine_vi
from .base import (
    C4_PSEUDO,
    DEMI_CONTRACTIVE,
    FIRMLY_NONEXPANSIVE,
    MINTY_ONLY,
    MONOTONE,
    NONEXPANSIVE,
    FixedPointProblem,
    VIProblem,
)
from .cfp import (
    Ball,
    Hyperplane,
    balls_operator,
    hyperplanes_operator,
    make_balls_cfp,
    make_linear_cfp,
    simultaneous_projection,
)
from .libsvm import parse_libsvm, serialize_libsvm
from .logistic import (
    logistic_grad,
    logistic_value,
    make_logistic,
    make_synthetic_logistic,
    softplus,
    synthetic_logistic_data,
)
from .nash import NashParams, firm_profit_loss, make_nash, nash_F, nash_params
from .nonmonotone import NONTRIVIAL_NORM, make_nonmonotone, nonmonotone_F
from .saddle import make_bilinear_saddle, make_random_saddle

