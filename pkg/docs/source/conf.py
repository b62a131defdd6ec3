# Configuration file for the Sphinx documentation builder.

# standard libs
import os
import sys

sys.path.insert(0, os.path.abspath('../..'))

# internal libs
from affinform.__meta__ import __appname__, __version__, __authors__  # noqa: E402


project = __appname__
author = __authors__
copyright = f'2019, {__authors__}'
version = '.'.join(__version__.split('.')[:2])
release = __version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'

html_theme = 'alabaster'
htmlhelp_basename = f'{__appname__}doc'
