"""
Setup file for Keyframer - staged animated transitions between charts.
"""
from setuptools import setup, find_packages

setup(
    name="keyframer",
    version="1.0.0",
    packages=find_packages('src'),
    package_dir={'': 'src'},
    py_modules=['cli'],
    package_data={'models': ['schema/*.json']},
    install_requires=[
        'docopt>=0.6.2',
        'jsonschema>=4.0.0',
        'numpy>=1.22.0',
        'pandas>=1.4.0',
        'SQLAlchemy>=2.0.0',
    ],
    entry_points={
        'console_scripts': [
            'keyframer=cli:main',
        ],
    },
    description="Keyframe and staged animation recommendation for declarative chart transitions",
    long_description=open('README.md').read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.9',
)
