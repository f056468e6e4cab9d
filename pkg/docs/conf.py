#!/usr/bin/env python
#
# robfit documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.
#
#  Copyright (c) 2021 robfit
import sys
from pathlib import Path

project_dir = Path(__file__).parents[1]
sys.path.insert(0, str(project_dir))

import robfit  # noqa: E402

# -- General configuration ---------------------------------------------

needs_sphinx = '3.0.0'

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx_autodoc_typehints',
    # sphinx_autodoc_typehints must be imported after napoleon to properly work.
    'sphinx.ext.autosummary',
    'sphinx.ext.viewcode',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.todo',
    'sphinx_copybutton',
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'pandas': ('https://pandas.pydata.org/docs/', None),
}

source_suffix = '.rst'

master_doc = 'index'

project = 'robfit'
copyright = robfit.__copyright__
author = 'robfit developers'

version = robfit.__version__.split('+')[0]
release = robfit.__version__

language = 'en'

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

pygments_style = 'sphinx'

# -- Napoleon settings ---------------------------------------------

using_numpy_style = False  # False -> google style
napoleon_google_docstring = not using_numpy_style
napoleon_numpy_docstring = using_numpy_style
napoleon_include_init_with_doc = False
napoleon_include_private_with_doc = False
napoleon_include_special_with_doc = True
napoleon_use_ivar = False
napoleon_use_param = True
napoleon_use_rtype = True

# -- sphinx_autodoc_typehints settings ---------------------------------------------

set_type_checking_flag = True
typehints_fully_qualified = False
always_document_param_types = False
typehints_document_rtype = True

# -- autodoc settings ---------------------------------------------

autoclass_content = 'both'
autodoc_member_order = 'bysource'
autodoc_default_options = {
    'show-inheritance': True,
}
autodoc_inherit_docstrings = False

autosummary_generate = True

todo_include_todos = True

# -- Options for HTML output -------------------------------------------

html_theme = "pydata_sphinx_theme"
html_static_path = []
