"""Pre-built brain-inspired circuits and their experiment protocols."""

from .drosophila import (  # noqa: F401
    DrosophilaConfig,
    DrosophilaNet,
    build_drosophila,
    preference_sweep,
    test_dilemma,
    train_drosophila,
)
from .bdm import (  # noqa: F401
    BDMConfig,
    BDMNet,
    CorridorEnv,
    RewardTaskEnv,
    build_bdm,
    run_bdm_task,
)
from .column import (  # noqa: F401
    ColumnConfig,
    ColumnNet,
    build_column,
    classify_presets,
    stimulate_l4,
)
from .mouse import (  # noqa: F401
    MouseBrainConfig,
    MouseBrainNet,
    build_mouse_brain,
    generate_connectome,
    load_connectome,
    run_spontaneous,
    save_connectome,
)
from .digits import (  # noqa: F401
    UnsupervisedLayer,
    assign_labels_and_score,
    build_unsupervised_layer,
    train_unsupervised,
)
