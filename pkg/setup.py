from setuptools import setup, find_packages

setup(
    name='lorroll',
    version='0.1.0',
    description='Rolling of pseudo-Riemannian manifolds on R^{n,nu}, Lorentzian holonomy and controllability',
    packages=find_packages(),
    package_data={
        'lorroll': ['schemas/*.json'],
    },
    install_requires=[
        'rich',
        'numpy>=1.22',
        'scipy>=1.8',
        'jsonschema>=4',
        'lark>=1.1',
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': [
            'lorroll=lorroll.__main__:main',
        ],
    },
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: MIT License',
        'Operating System :: OS Independent',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    python_requires='>=3.9',
)
