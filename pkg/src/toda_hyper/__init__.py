"""Toda systems with three singular sources, their Fuchsian equations and
hypergeometric solutions."""
from .builder import TodaSolution, construct, invariant_form, wronskian_constant
from .cases import CaseResult, classify
from .exponents import ExponentSet, fuchs_check, local_exponents, shifted_exponents
from .gamma import SingularData, cartan_inverse, cartan_matrix, mass_targets, super_gamma
from .hypergeo import HgParams, hg_ode, hg_params, indicial_roots, interlace
from .ode import OdeSystem, Path, monodromy, transport

__all__ = [
    "CaseResult", "ExponentSet", "HgParams", "OdeSystem", "Path", "SingularData", "TodaSolution",
    "cartan_inverse", "cartan_matrix", "classify", "construct", "fuchs_check", "hg_ode",
    "hg_params", "indicial_roots", "interlace", "invariant_form", "local_exponents",
    "mass_targets", "monodromy", "shifted_exponents", "super_gamma", "transport",
    "wronskian_constant",
]
__version__ = "0.1.0"
