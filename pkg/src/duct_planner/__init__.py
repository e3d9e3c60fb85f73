"""Ship trajectory planning over evaporation-duct channel gain maps."""

from .cgm import (ChannelGainMap, DuctModelParams, GridSpec, OutOfExtentError,
                  load_cgm, load_csv, locate_cell, perturb, save_cgm,
                  synthesize_duct_map)
from .evaluator import (CgmField, EvalResult, LosFreeSpaceField, Scenario,
                        UniformField, evaluate, evaluate_population, fitness)
from .kinematics import Trajectory, integrate_trajectory, smooth, steering_penalty
from .metrics import hypervolume2d, line_distribution, normalized_hypervolume
from .moea import (Individual, MoeaConfig, crowding, evolve, init_population,
                   mutate, nondominated_sort, sbx)
from .pso import Archive, Particle, PsoConfig, inertia, refine
from .radio import (RadioParams, free_space_gain, free_space_path_loss_db,
                    los_range, shannon_rate)
from .scenario import (make_case, plan_multi_waypoint, run_baseline, run_hybrid,
                       run_nsga_only)

__version__ = "0.1.0"
