"""A multimodal fusion and sparse attention sequential recommender.

:license: Apache License, Version 2.0, see LICENSE for details.
"""
__version__ = '0.1.0'
