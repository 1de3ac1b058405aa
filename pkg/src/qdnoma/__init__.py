"""Minimum-power CoMP-NOMA beamforming under quasi-degraded channels."""

from .channel import ChannelSet, ScenarioConfig, gen_channel_set, sample_positions
from .dpc import Infeasible, build_cache, solve_dpc
from .oracle import grid_oracle_dpc, verify_solution
from .pairing import GroupAssignment, UserPopulation, corr_pairing, qdup, random_pairing
from .rates import BeamformerSet, SinrTargets, achievable_rates, check_feasible, eps_from_rate
from .schemes import h_comp_noma, qd_check, zfbf_solve

__version__ = "0.1.0"
