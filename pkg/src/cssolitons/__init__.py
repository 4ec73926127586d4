"""Numerical laboratory for self-similar solutions of curve shortening flow.

Modules:
  skewlin      skew-symmetric normal forms, exponentials, projectors
  taxonomy     classification of symmetry-subgroup generators (A/B/C)
  helices      closed-form static-symmetry solutions and the t-tau change
  params       parameter and state types of the soliton flow
  flow         adaptive integration of the profile system and its
               compactification; family reconstruction and CS residuals
  diagnostics  lambda, mu, nu, curvature, the almost-Lyapunov V, distance
               ODEs, monotonicity and planarity reports
  asymptotics  regions R+-(K), Grim Reaper arcs, spiral asymptotes, shooting
  catalog      named soliton fixtures
  cli          scenario runner and CSV export
"""

from .params import CompactState, PhaseState, SolitonParams, params_from_matrix
from .flow import IntegratorOptions, Trajectory, integrate

__all__ = [
    "CompactState",
    "PhaseState",
    "SolitonParams",
    "params_from_matrix",
    "IntegratorOptions",
    "Trajectory",
    "integrate",
]
