from setuptools import setup, find_packages

setup(name='volsurf',
      version='1.0.0',
      description="Finite element simulation and verification of volume-surface reaction-diffusion systems.",
      long_description="""\
volsurf discretizes linear volume-surface reaction-diffusion systems on two-dimensional domains with P1 finite elements and backward Euler time stepping. Besides plain simulation it verifies the discretization: it checks mass conservation and the discrete entropy identity step by step, measures convergence orders under mesh and time step refinement, computes the sharp discrete entropy / entropy-dissipation constant and compares it with the observed exponential decay towards equilibrium. A two-species model problem and a four-species system with a surface subregion are included.""",
      classifiers=[
          'Development Status :: 4 - Beta',
          'Environment :: Console',
          'Intended Audience :: Science/Research',
          'License :: OSI Approved :: Apache Software License',
          'Operating System :: MacOS',
          'Operating System :: Microsoft',
          'Operating System :: POSIX :: Linux',
          'Programming Language :: Python :: 3.8',
          'Programming Language :: Python :: 3.9',
          'Programming Language :: Python :: 3.10',
          'Programming Language :: Python :: 3.11',
          'Topic :: Scientific/Engineering :: Mathematics',
      ],
      keywords='finite elements reaction diffusion bulk surface entropy method convergence',
      license='Apache License 2.0',
      packages=find_packages(exclude=['ez_setup', 'examples', 'tests']),
      package_data={'volsurf': ['defaults/*.json']},
      include_package_data=True,
      zip_safe=False,
      python_requires='>=3.8',
      install_requires=[
          'numpy>=1.20',
          'scipy>=1.8',
          'sympy>=1.9',
          'meshio>=5.0',
          'pandas>=1.5',
          'hjson>=1.5.8',
          'plac>=0.9.6',
          'dotmap>=1.2.17',
          'ago>=0.0.9',
          'hurry.filesize>=0.9',
      ],
      extras_require={
          'test': ['pytest>=6.0'],
      },
      entry_points={
          'console_scripts': ['volsurf = volsurf.__main__:main', ],
      },
      )
