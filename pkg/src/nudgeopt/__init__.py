"""Influence-campaign simulation and policy optimization on follower
networks under bounded-confidence opinion dynamics."""

from .network import (Network, load_network, save_network, path_network,
                      top_out_degree, sample_induced_subgraph)
from .dynamics import ModelParams, Trajectory, shift, drift, integrate
from .objectives import ObjectiveKind, evaluate, gradient
from .policy import (Agent, PolicyParams, greedy_content_step, initial_opinion,
                     degroot_static_opinion, NudgingPolicy, StaticPolicy,
                     policy_objective)
from .targeting import (TargetingConfig, TargetMatrix, TargetingResult,
                        consideration_set, greedy_targets)
from .oracle import (OracleReport, grid_argmax, brute_force_control,
                     counterexample_suite, find_agent_count_regression,
                     verify_witness)
from .campaign import (CampaignConfig, CampaignResult, ConfigError, DeltaResult,
                       objective_delta, export_density, run_campaign)
from .llm_content import (PromptSpec, EndpointConfig, EndpointError,
                          build_instruction, build_prompt, scale_opinion,
                          generate_content, render_policy)

__version__ = "0.1.0"
