#
# akcy documentation build configuration file.
#

import os
import sys

sys.path.insert(0, os.path.abspath('..'))
from akcy import __version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'akcy'
copyright = '2026, the akcy developers'

version = __version__
release = version

exclude_patterns = ['_build']
pygments_style = 'sphinx'

autodoc_member_order = 'bysource'

html_theme = 'furo'
html_static_path = []
htmlhelp_basename = 'akcydoc'

man_pages = [('index', 'akcy', 'akcy Documentation', ['the akcy developers'], 1)]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'scipy': ('https://docs.scipy.org/doc/scipy', None),
}
