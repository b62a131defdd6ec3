#!/usr/bin/env python3
# This file is part of the affinform package.
#
# This program is free software: you can redistribute it and/or modify it under the
# terms of the Apache License (v2.0) as published by the Apache Software Foundation.
#
# This program is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
# PARTICULAR PURPOSE. See the Apache License for more details.
#
# You should have received a copy of the Apache License along with this program.
# If not, see <https://www.apache.org/licenses/LICENSE-2.0>.

"""Setup and installation script for affinform package."""

# standard libs
import os
from setuptools import setup, find_packages

# internal libs
from affinform.__meta__ import (__appname__,
                                __version__,
                                __authors__,
                                __contact__,
                                __license__)


CMD_PREFIX = 'affinform.'  # Change this to '' to remove prefix on all commands
TOOLS = ['{prefix}{name}=affinform.bin.{module}:main'.format(prefix=CMD_PREFIX, name=name, module=module)
         for name, module in {'run':    'run',
                              'design': 'design',
                              'verify': 'verify',
                              'batch':  'batch',
                              }.items()]
TOOLS.append('affinform=affinform.bin.main:main')


def readme_file():
    """Use README.md as long_description."""
    with open(os.path.join(os.path.dirname(__file__), "README.md"), 'r') as readme:
        return readme.read()


setup(
    name             = __appname__,
    version          = __version__,
    author           = __authors__,
    author_email     = __contact__,
    description      = 'Design, analysis and simulation of leaderless affine formation maneuvers.',
    license          = __license__,
    keywords         = 'multi-agent formation control affine laplacian simulation',
    packages         = find_packages(exclude=['tests']),
    package_data     = {'affinform.datasets': ['scenarios/*.json']},
    long_description = readme_file(),
    long_description_content_type = 'text/markdown',
    classifiers      = ['Development Status :: 4 - Beta',
                        'Topic :: Scientific/Engineering',
                        'Programming Language :: Python :: 3.7',
                        'Programming Language :: Python :: 3.8',
                        'Programming Language :: Python :: 3.9',
                        'License :: OSI Approved :: Apache Software License', ],
    python_requires  = '>=3.7',
    install_requires = ['numpy', 'scipy', 'pandas', 'tqdm', 'logalpha<2'],
    extras_require   = {'tests': ['pytest'], 'docs': ['sphinx']},
    entry_points     = {'console_scripts': TOOLS},
)
