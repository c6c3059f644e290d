from setuptools import setup, find_packages

setup(
    name='pyfekete',
    version='1.0.0',
    packages=find_packages(exclude=['tests']),
    include_package_data=True,
    package_data={
        'pyfekete': ['config.json', 'fixtures.json'],
    },
    install_requires=[
        'numpy',
        'scipy',
        'sympy',
        'pandas',
        'tqdm',
        'termcolor',
        'fastparquet',
        'click',
        'tabulate'
    ],
    entry_points={
        'console_scripts': [
            'fekete=pyfekete.cli:cli',
        ],
    },
    description='Numerical experiments on mixed character sums and Fekete polynomials',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    classifiers=[
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    python_requires='>=3.9',
)
