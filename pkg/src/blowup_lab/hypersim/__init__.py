"""Finite-volume simulations of slab Euler and vertical-field MHD."""

from .analysis import ChainAudit, LifespanExperiment, lifespan_experiment, ode_chain_audit, simple_wave_run
from .mhd2d import Mhd2dInit, run_euler2d, run_mhd2d
from .scheme import BoundaryError, VacuumError
from .slab import SimOutput, SlabInit, dam_break_exact, run_dam_break, run_slab_euler
from .snapshot import Snapshot, read_snapshot, write_snapshot
