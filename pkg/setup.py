from setuptools import setup, find_packages

def description():
    with open('readme.rst', encoding="utf-8") as f:
         return f.read()

setup(name='gridlag',
      packages=find_packages(exclude=['tests']),
      version='0.1.0',
      include_package_data=True,
      package_data={
          'gridlag': ['presets.yaml', 'logging_config.json', 'fixtures/*.yaml'],
      },
      description='Adaptive background partitioning and two-state game prediction '
                  'for latency-tolerant multiplayer games',
      long_description=description(),

      install_requires=[
          'influxdb',
          'networkx',
          'numpy',
          'python-dateutil',
          'python-logstash',
          'PyYAML',
          'simpy',
      ],
      extras_require={
          'test': ['pytest'],
      },
      entry_points={
          'console_scripts': ['gridlag=gridlag.cli:main'],
      },
      zip_safe=False,

      license='BSD',
      classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Games/Entertainment',
        'Topic :: System :: Networking',
        'License :: OSI Approved :: BSD License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
      ],
      keywords=['multiplayer', 'latency', 'prediction', 'dead reckoning', 'simulation']
)
