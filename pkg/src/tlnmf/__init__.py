"""Transform-learning NMF.

Joint estimation of a short-time orthogonal transform and a nonnegative
factorization of the resulting power spectrogram under the Itakura-Saito
divergence, plus a supervised variant for speech / noise separation.
"""

from .driver import Hyperparams, RunConfig, RunState, init_state, iterate, rank_atoms, run
from .manifold import (LineSearchConfig, ProjectionError, armijo_step, gradient_phi,
                       gradient_phi_supervised, natural_gradient, project_orthogonal)
from .metrics import BssScores, bss_eval
from .objective import is_divergence, objective_supervised, objective_tlnmf
from .signal import (FrameMatrix, FramingConfig, Signal, WavFormatError, frame,
                     overlap_add, read_wav, write_wav)
from .supervised import (SeparationResult, SupervisedHyperparams, TrainingSet,
                         run_supervised, wiener_reconstruct)
from .transform import dct_matrix, normalize_sign, power_spectrogram, random_orthogonal
from .updates import normalize_columns, update_h, update_h_supervised, update_w

__version__ = "0.1.0"
