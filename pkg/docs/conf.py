#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# pypcsp documentation build configuration file.

import os
import sys

sys.path.insert(0, os.path.abspath('..'))

import pypcsp

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.todo',
    'sphinx.ext.coverage',
    'sphinx.ext.imgmath',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'PyPCSP'
copyright = '2026, PyPCSP contributors'
author = 'PyPCSP contributors'

version = pypcsp.__version__
release = pypcsp.__version__

language = None
exclude_patterns = ['_build']
pygments_style = 'sphinx'
todo_include_todos = True

autodoc_member_order = 'bysource'

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'pypcspdoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {}

latex_documents = [
    (master_doc, 'pypcsp.tex', 'pypcsp Documentation', 'PyPCSP contributors', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'pypcsp', 'pypcsp Documentation', [author], 1),
]

# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
    (
        master_doc,
        'pypcsp',
        'pypcsp Documentation',
        author,
        'pypcsp',
        'Testing, simulation and axioms for finite probabilistic CSP.',
        'Miscellaneous',
    ),
]
