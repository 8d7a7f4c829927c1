"""hetfed: a deterministic federated-learning simulator for studying how
client data heterogeneity shapes backdoor attacks and their defenses."""

__version__ = "0.1.0"

from .datagen import (  # noqa: F401
    Dataset,
    Sample,
    TriggerPattern,
    apply_trigger,
    gen_synthetic,
    load_idx,
    split_train_test,
)
from .errors import CapacityError, ConfigError, FormatError, InfeasibleError  # noqa: F401
from .partition import (  # noqa: F401
    Partition,
    class_histogram,
    distance,
    heterogeneity_index,
    histogram_at_distance,
    partition_class_cap,
    partition_dirichlet,
    partition_gaussian,
)
