#  Copyright (c) 2021 robfit

import concurrent.futures
import multiprocessing
import os
import threading
import warnings
from typing import Iterable, List, Union

from dotmap import DotMap

from . import ztyping


class RunManager:
    DEFAULT_MODE = {'parallel': 'auto'}

    def __init__(self, n_cpu='auto'):
        """Handle the resources and runtime specific options.

        The worker count steers the internal parallelism of the partition table construction and of the
        convergence sweeps. Results never depend on it: work is mapped in order and gathered in order.
        """
        self._cpu = []
        self._local = threading.local()
        self._mode = DotMap(self.DEFAULT_MODE.copy())
        self.set_n_cpu(n_cpu=n_cpu)

    @property
    def mode(self):
        return self._mode

    @property
    def n_cpu(self):
        return len(self._cpu)

    def set_n_cpu(self, n_cpu: Union[str, int] = 'auto') -> None:
        """Set the number of cpus (worker threads) to be used by robfit.

        Args:
            n_cpu: Number of workers or 'auto'. 'auto' reads the `ROBFIT_N_CPU` environment variable and
                falls back to the cpus available to this process.
        """
        if n_cpu == 'auto':
            n_cpu_env = os.environ.get("ROBFIT_N_CPU")
            if n_cpu_env is not None:
                n_cpu = int(n_cpu_env)
        if n_cpu == 'auto':
            try:
                cpu = sorted(os.sched_getaffinity(0))
            except AttributeError:
                cpu = range(multiprocessing.cpu_count())
                warnings.warn("Not running on Linux. Determining available cpus for thread can fail"
                              "and be overestimated. Workaround (only if too many cpus are used):"
                              "`robfit.run.set_n_cpu(your_cpu_number)`")
        elif isinstance(n_cpu, int):
            if n_cpu < 1:
                raise ValueError(f"n_cpu has to be at least 1, not {n_cpu}.")
            cpu = range(n_cpu)
        else:
            raise TypeError(f"n_cpu has to be 'auto' or an int, not {n_cpu}.")
        self._cpu = [f'dummy_cpu{i}' for i in cpu]

    @property
    def in_worker(self) -> bool:
        """Whether the calling thread executes an item of :py:meth:`map`."""
        return getattr(self._local, 'in_worker', False)

    def map(self, func: ztyping.MapFuncType, iterable: Iterable) -> List:
        """Apply `func` to every item and return the results in input order.

        Runs in a thread pool if more than one cpu is available, sequentially otherwise. Calls from
        inside a worker (nested maps) run sequentially, so at most `n_cpu` workers exist at a time. The
        order of the returned list is the order of `iterable` in all cases.
        """
        items = list(iterable)
        if self.n_cpu <= 1 or len(items) <= 1 or self.mode.parallel is False or self.in_worker:
            return [func(item) for item in items]

        def run_item(item):
            self._local.in_worker = True
            try:
                return func(item)
            finally:
                self._local.in_worker = False

        with concurrent.futures.ThreadPoolExecutor(max_workers=self.n_cpu) as executor:
            return list(executor.map(run_item, items))
