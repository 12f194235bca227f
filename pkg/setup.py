#!/usr/bin/env python
# -*- coding: utf-8 -*-

from setuptools import setup, find_packages
import os.path as p

VERSION = open(p.join(p.dirname(p.abspath(__file__)), 'VERSION')).read().strip()

setup(
    name='seqdisc',
    version=VERSION,
    description='Sequential unambiguous discrimination of two qubit states.',
    packages=find_packages(where='lib'),
    package_dir={'': 'lib'},
    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.20',
        'scipy>=1.7',
        'Logbook>=1.5',
    ],
    extras_require={
        'tests': ['pytest>=7'],
    },
    entry_points={
        'console_scripts': ['seqdisc = seqdisc.cli:main'],
    },
)
