from .experiments import (ConfigError, run_annealed, run_convergence,
                          run_exploitability_eval, run_match,
                          run_stepsize_sweep)
from .match import (FirstLegalAgent, PolicyAgent, UniformAgent, bootstrap_ci,
                    play_game, run_match_games)

__all__ = [
    "ConfigError", "FirstLegalAgent", "PolicyAgent", "UniformAgent",
    "bootstrap_ci", "play_game", "run_annealed", "run_convergence",
    "run_exploitability_eval", "run_match", "run_match_games",
    "run_stepsize_sweep",
]
