from mufasa.models.mufasa_model import Mufasa
from mufasa.models.no_mfl import NoMfl
from mufasa.models.no_sal import NoSal
from mufasa.models.full_attention import FullAttention

from mufasa.models.model import Model

index = {
    'full':           Mufasa,
    'no_mfl':         NoMfl,
    'no_sal':         NoSal,
    'full_attention': FullAttention,
}

# Default
DEFAULT_VARIANT = 'full'
