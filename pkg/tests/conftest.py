import os
import sys
from pathlib import Path

# single-threaded kernels: the harness parallelizes across sweep cells, and
# nested BLAS/FFT threading oversubscribes the small CI machines
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

sys.path.insert(0, str(Path(__file__).parent))
