# -*- coding: utf-8 -*-
#
# anisodiff documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys
import os

# Make the package importable without installing it.
sys.path.insert(0, os.path.abspath('../../'))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'anisodiff'
copyright = '2020, anisodiff contributors'
author = 'anisodiff contributors'

version = '0.1'
release = '0.1.0'

language = None
exclude_patterns = []
pygments_style = 'sphinx'
todo_include_todos = False

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
htmlhelp_basename = 'anisodiffdoc'

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'anisodiff', 'anisodiff Documentation',
     [author], 1)
]

autodoc_member_order = 'bysource'
