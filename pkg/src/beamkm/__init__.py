"""Kolmogorov-model beam alignment for mmWave MIMO.

Library layout:
  channel   codebooks, rank-1 channels, sounding, genie/exhaustive baselines
  prob_est  FE and KS empirical-probability estimation for training pairs
  km        inner-product model, Frank-Wolfe, block-coordinate training
  dmo       branch-reduce-and-bound binary quadratic solver + oracle
  bench     seeded Monte-Carlo driver, timing and calibration benchmarks
  cli       `beamkm` command-line entry point
"""

from .bench import ExperimentConfig, TrialRecord, run_beam_alignment, run_experiment
from .channel import (ChannelInstance, Codebook, SoundingOutcome,
                      beamforming_gain, child_rng, exhaustive_search,
                      genie_best_pair, make_dft_codebook, sample_channel,
                      sound_beam_pair, to_db)
from .dmo import (BqpInstance, Box, DmfInstance, ReductionOutcome, SolverState,
                  bqp_objective, brute_force_bqp, solve_bqp)
from .km import (KmModel, LcqpInstance, assemble_bqp, assemble_lcqp, bcd_learn,
                 ker_probability, predict, select_beam_pair,
                 solve_lcqp_frank_wolfe)
from .prob_est import (EmpiricalProbTable, FeConfig, KsDetector,
                       build_training_table, fe_estimate_pair, h0_cdf,
                       ks_estimate_pair, ks_statistic, ks_threshold)

__version__ = "0.1.0"
