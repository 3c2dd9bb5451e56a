import os
import sys


def pytest_configure(config):
    for var in ("FASTMKS_MODULE_DIR", "FASTMKS_PKG_DIR"):
        path = os.environ.get(var)
        if path and path not in sys.path:
            sys.path.insert(0, path)
