# -*- coding: utf-8 -*-
#
# mufasa documentation build configuration file

import mufasa

# Sphinx setup
extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.ifconfig',
              'sphinx.ext.viewcode',
              'sphinx.ext.autosectionlabel']
autosectionlabel_maxdepth = 2
templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

# General information about the project.
project = mufasa.__name__
version = mufasa.__version__
release = mufasa.__version__

exclude_patterns = []

# The name of the Pygments (syntax highlighting) style to use.
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinxdoc'
htmlhelp_basename = 'mufasadoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}

latex_documents = [
  ('index', 'mufasa.tex', u'mufasa Documentation',
   u'mufasa developers', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
        ('usage',
         'mufasa',
         'Multimodal fusion and sparse attention sequential recommender',
         None,
         1)
]
