"""Discrete speech-unit streams: run-length coding, bounded duration
regulation, k-means quantization, frame scheduling and evaluation metrics."""
from .errors import IsoUnitError
from .harness import SyntheticSpec, generate_corpus, compare_modes, run_table3_style
from .lengthreg import (
    BoundedAllocation,
    DurationTable,
    allocate_proportional,
    bound_durations,
    early_stop,
    fit_duration_table,
    integerize_bounded,
    predict_durations,
    regulate_batch,
)
from .metrics import (
    EvalReport,
    combined_loss,
    corpus_bleu,
    gan_losses,
    length_compliance,
    length_ratio,
    lip_l1,
    s2ut_nll,
    sync_loss,
    sync_similarity,
)
from .quantize import Codebook, kmeans_fit, nmi, purity, quantize_assign
from .schedule import FrameTimeline, assign_reference_frames, build_timeline
from .units import ContinuousUnitSeq, collapse, expand

__version__ = "0.1.0"
