"""orbitlab: workbench for the divisor-step recursion n -> n - tau(n)."""

__version__ = "0.1.0"

from .sieve import (DEFAULT_BLOCK_SIZE, TauBlock, divisor_count, sieve_block,
                    tau_moment_range, tau_moment_sum)
from .orbit import (DyadicRecord, InvariantError, NoCrossingError,
                    OrbitInterrupted, OrbitSummary, RunOptions, TauTable,
                    orbit_lengths_upto, orbit_segment, orbit_step, resume,
                    run_orbit, segment_from_summary)
from .analytics import (RatioRow, TailReport, bounded_restrict, log_integral,
                        ratio_table, tail_energy)
from .mixing import (CrtLevel, LadderRun, MixingReport, RegularSet,
                     crt_level, detect_ladders, divisor_discrepancy,
                     fourier_bias, mixing_report, phase_increment_msq,
                     residue_concentration, residue_distribution,
                     variance_and_regular_set)
from .sampler import (ConcentrationScan, ProgressionReport, TauHistogram,
                      concentration_ratio, energy_by_dyadic_tau_range,
                      orbit_scale_concentration, sample_progressions,
                      tau_histogram)
from .rng import SplitMix64
