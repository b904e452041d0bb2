from mufasa.optimizers.sgd import SGD
from mufasa.optimizers.adam import Adam

from mufasa.optimizers.optimizer import Optimizer

index = {
    'sgd': SGD,
    'adam': Adam,
}

DEFAULT_OPTIMIZER = 'sgd'
