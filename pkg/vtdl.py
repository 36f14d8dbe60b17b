"""
VTDL entry point
Usage: python vtdl.py <command> [options]
"""
from src.cli.main import run

if __name__ == "__main__":
    run()
