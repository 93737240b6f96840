"""
Sparse Pose Recovery
Command Line Entry Point
"""

from sparsepose.cli import cli

if __name__ == '__main__':
    cli(obj={})
