"""Ablation without the fusion layer: items are the plain average of their
modality rows.

:license: Apache License, Version 2.0, see LICENSE for details
"""

from mufasa.models.mufasa_model import Mufasa


class NoMfl(Mufasa):

    name = 'no_mfl'
    uses_mfl = False
