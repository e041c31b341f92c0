"""Spherically symmetric virtual permutations under the Hamming, Kendall-tau and Cayley metrics.

Exact sphere and extension counts, Martin kernels and their limit laws, growth
samplers for the extreme laws, and an exhaustive/statistical verification harness.
"""
from importlib.metadata import PackageNotFoundError, version as _version

from .exact import (CountTable, ExtensionCountTable, count_table, derangements, eppf, extension_counts,
                    limit_law, mahonian_row, martin_kernel, martin_kernels, sphere_count, stirling1_row,
                    to_param)
from .perm import (Metric, Permutation, all_permutations, cycle_count, distance, extensions, fixed_points,
                   inversions, lehmer_decode, lehmer_encode, parse_permutation, project_cycle_delete,
                   project_letter_delete, project_order_restrict)
from .samplers import (Ewens, GrowthProcess, HammingAlpha, Mallows, Uniform, exact_growth_law, make_rng,
                       sample_batch, sample_sphere_uniform, spawn_rngs)
from .verify import (ExactLaw, check_monotonicity, check_spherical_symmetry, convergence_experiment,
                     exact_projected_law)

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
