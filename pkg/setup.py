# -*- coding: utf-8 -*-
from setuptools import setup


with open("README.txt") as f:
    long_description = f.read()


setup(name='meshcond',
      version='0.1.0',
      description='Conditioning of linear finite element matrices on '
                  'simplicial meshes.',
      long_description=long_description,
      author='meshcond contributors',
      license='LGPL',
      packages=['meshcond'],
      install_requires=['numpy', 'scipy'],
      entry_points={'console_scripts': ['meshcond = meshcond.cli:main']},
      classifiers=['Development Status :: 3 - Alpha',
                   'Intended Audience :: Science/Research',
                   'License :: OSI Approved :: GNU Library or Lesser General Public License (LGPL)',
                   'Programming Language :: Python :: 3',
                   'Topic :: Scientific/Engineering :: Mathematics'])
