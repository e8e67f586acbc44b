"""capflow: incompressible multi-phase flow on a MAC lattice with
phase-field surface tension, VOF wall treatment and projection time stepping."""

from .capillary import (CapillaryParams, area_estimate, capillary_force_multi,
                        capillary_stress_two, capillary_stress_wall, curvature,
                        interface_normal, surface_energy_N, surface_energy_sym3)
from .forces import ForceParams, strain_rate, total_force, viscous_stress, wall_shear
from .lattice import (BoundarySpec, CellTensorField, FaceField, Grid,
                      apply_boundary, build_grid, cell_gradient, face_divergence)
from .phase import (PhaseSet, Shape, WallGeometry, init_color_from_shape,
                    mix_density, mix_viscosity, no_wall, partition_residual,
                    proper_sigma, wall_fractions)
from .pressure import PcgConfig, PoissonOperator, assemble_poisson, pcg_solve, project
from .solver import PhysParams, RunConfig, SimState, initial_state, run, stable_dt, step
from .transport import advect_fraction, momentum_advect

__version__ = "0.1.0"
