"""tlbench: compare transfer-learning strategies under a shared protocol.

Three strategies over any backend satisfying the Trainable contract:
intermediate fine-tuning (train on a supporting task, then the target),
pairwise joint training over heterogeneous batch schedules, and joint
training over all tasks at once. Includes the multi-seed significance
protocol, the size-based strategy selector, and the reporting pipeline.
"""

from .backends import TinyTextBackend, tiny_backend_factory
from .data import (Example, Split, SplitData, SubsampleMode, SubsampleSpec,
                   load_split, make_synthetic_task, subsample)
from .engine import (CheckpointRecord, TaskData, TrainConfig, TrainResult,
                     Trainable, evaluate_final, select_macro_mean, select_on,
                     train)
from .errors import (DuplicateTaskError, IncompleteCellError, IncompleteError,
                     InsufficientDataError, IntegrityError, ParseError,
                     RunError, TlbenchError, UnknownTaskError, ValidationError)
from .experiments import (AnalysisSummary, ExperimentPlan, PlanCounts,
                          PlanKind, SweepSettings, analyze, dry_run,
                          run_matrix, run_mtl_all_plan, run_size_sweep)
from .heuristic import (AccuracyReport, HeuristicPrediction, Prediction,
                        heuristic_accuracy, predict_matrix, select_strategy)
from .reporting import (AggregateTable, aggregate_table, difference_matrix,
                        render_heatmap, render_size_sweep)
from .scheduler import (BatchSchedule, PolicyKind, PolicySchedule,
                        SamplingPolicy, TaskWeights, build_schedule,
                        dynamic_update, initial_weights)
from .stats import (CellLabel, ScoreSample, SignificanceMatrix, TestResult,
                    TestVariant, aggregate, build_significance_matrix, t_test)
from .store import BlobStore, RunStore
from .strategies import (RunRecord, Stage, Strategy, run_mtl_all,
                         run_mtl_pair, run_stilts)
from .tasks import (MetricKind, Registry, TaskSpec, builtin_glue_registry,
                    load_registry, save_registry)

__version__ = "0.1.0"
