"""Executable identities and experiments on fixture currents."""
from .jensen import JensenReport, KappaCalibration, alpha_mass_identity, calibrate_kappa, get_kappa, jensen_check
from .cones import ConvergenceReport, adherence_classify, cone_experiment, conic_check, interleaving_check
from .chart import chart_coefficient_pairing, coefficient_mass_estimates
from .blowup import BlowupMassReport, blowup_mass, restriction_identity

__all__ = [
    "JensenReport",
    "KappaCalibration",
    "alpha_mass_identity",
    "calibrate_kappa",
    "get_kappa",
    "jensen_check",
    "ConvergenceReport",
    "adherence_classify",
    "cone_experiment",
    "conic_check",
    "interleaving_check",
    "chart_coefficient_pairing",
    "coefficient_mass_estimates",
    "BlowupMassReport",
    "blowup_mass",
    "restriction_identity",
]
