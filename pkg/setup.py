from setuptools import setup, find_packages

long_description = """sidetrace is a Python based library for power side-channel trace analysis. It fingerprints the 
control flow of a program from a single power trace with the continuous wavelet transform, and includes the signal 
processing around it: filtering, peripheral peak excision, SPI decoding from power, fingerprint comparison, round 
motif detection and crash clustering, all testable against a built-in synthetic trace generator."""

setup(name='sidetrace',
      version='0.1.0',
      description='sidetrace is a Python based library for power side-channel trace analysis',
      author='The sidetrace authors',
      license='Apache 2.0',
      long_description=long_description,
      keywords=['side-channel', 'power', 'wavelet', 'fingerprint', 'embedded', 'numpy', 'pandas', 'signal processing'],
      packages=find_packages(exclude=['tests', 'sidetrace_examples']),
      include_package_data=True,
      install_requires=['pandas',
                        'numpy',
                        'scipy',
                        'multiprocess',
                        'scikit-learn',
                        'matplotlib',
                        'numba',
                        'findatapy'],
      extras_require={'tests': ['pytest']},
      entry_points={'console_scripts': ['sidetrace = sidetrace.cli.sidetracecli:main']},
      zip_safe=False)
