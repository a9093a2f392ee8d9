"""Python front end for the halfspace_lab C++ core."""

import json

from ._core import (
    IllPosed,
    InvalidArgument,
    NoGap,
    NotAccretive,
    assemble_D,
    assemble_TA,
    check_wellposed,
    estimate_kappa,
    experiment_ids,
    expm,
    make_coefficient,
    matrix_sign,
    solve_dirichlet,
)
from ._core import verify as _verify

__all__ = [
    "IllPosed",
    "InvalidArgument",
    "NoGap",
    "NotAccretive",
    "assemble_D",
    "assemble_TA",
    "check_wellposed",
    "estimate_kappa",
    "experiment_ids",
    "expm",
    "make_coefficient",
    "matrix_sign",
    "solve_dirichlet",
    "verify",
]


def verify(experiment, coeff="identity", seed=1, config=None):
    """Run one experiment and return its report as a dict.

    `config` is a dict in the same format as the CLI's --config file.
    """
    text = _verify(experiment, coeff, seed, json.dumps(config) if config else "")
    return json.loads(text)
