"""Coalitional decomposition of model quantities of interest.

The heavy lifting lives in the compiled extension ``coalsens._core``; this
package adds a dict-returning convenience wrapper around the JSON interface.
"""

import json as _json

from ._core import (
    mobius_boolean,
    mobius_transform,
    run_decomposition,
    shapley_attribution,
    subset_label,
    validate_config,
    zeta_transform,
)

__all__ = [
    "mobius_boolean",
    "mobius_transform",
    "zeta_transform",
    "shapley_attribution",
    "subset_label",
    "validate_config",
    "run_decomposition",
    "decompose",
]


def decompose(config, threads=1):
    """Run a decomposition for a config given as a dict (or JSON string).

    Returns the report parsed into a dict. See ``run_decomposition`` for the
    raw JSON-in/JSON-out interface, whose output is byte-identical to the CLI
    report artifact.
    """
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _json.loads(run_decomposition(config, threads))
