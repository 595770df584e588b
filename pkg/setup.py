from os import path

from setuptools import setup, find_packages

import orbitphase.scripts.version as version

here = path.abspath(path.dirname(__file__))

with open(path.join(here, 'README.rst'), encoding='utf-8') as f:
    long_description = f.read()

setup(
    name='orbitphase',
    description='Limiting phases along periodic ray orbits between obstacles in the plane',
    long_description=long_description,
    version=version.version,
    packages=find_packages(exclude=['tests', 'examples', 'examples.*']),
    package_data={'orbitphase': ['scenes/*.json']},
    include_package_data=True,
    python_requires='>=3.8',
    install_requires=[
        'click',
        'rainbow_logging_handler',
        'tablib',
        'pyyaml',
        'numpy',
        'scipy',
    ],
    tests_require=['pytest'],
    license='GPLv3',
    classifiers=[
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3 :: Only",
        "Topic :: Scientific/Engineering :: Physics",
        "License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)",
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        'Intended Audience :: Science/Research',
    ],
    entry_points='''
        [console_scripts]
        orbitphase=orbitphase.scripts.run:run
    '''
)
