"""gdrp: exact green drone routing with payload-dependent energy."""

from .model import (Customer, DroneType, Fleet, Instance, LegCoeffOverride,
                    OutOfRange, baseline_instance, build_distance_matrix,
                    builtin_fleet, builtin_instance, example1_instance,
                    example2_instance, generate_instance, instance_from_dict,
                    instance_to_dict, load_fleet, load_instance, make_instance,
                    save_fleet, save_instance)
from .solver import (Infeasible, Solution, SolveOptions, SolveResult, TooLarge,
                     Tour, brute_force, evaluate_fixed_routes, solve)

__version__ = "0.1.0"
