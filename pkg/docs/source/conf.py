# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.
#
# -- Path setup --------------------------------------------------------------

import os
import sys
sys.path.insert(
    0,
    os.path.normpath(
        os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "..")))

# -- Project information -----------------------------------------------------

project = 'SENATE simulator'
copyright = '(2026, SENATE simulator developers)'
author = 'SENATE simulator developers'

# The short X.Y version
version = '0.1.0'
# The full version, including alpha/beta/rc tags
release = '0.1.0'

# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosummary',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode',
]

autosummary_generate = True

source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = []
pygments_style = None

# -- Options for HTML output -------------------------------------------------

on_rtd = os.environ.get('READTHEDOCS', None) == 'True'
if not on_rtd:
    html_theme = 'nature'
htmlhelp_basename = 'senate_simulator_doc'

# -- Options for LaTeX output ------------------------------------------------

latex_documents = [
    (master_doc, 'senate_simulator.tex', 'SENATE simulator Documentation',
     author, 'manual'),
]

man_pages = [(master_doc, 'senate_simulator',
              'SENATE simulator Documentation', [author], 1)]

# -- Extension configuration -------------------------------------------------

intersphinx_mapping = {
    'python': ('https://docs.python.org/3/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'xarray': ('https://docs.xarray.dev/en/stable/', None),
}
