# Std lib
import os
from typing import Dict, List, Optional, Callable, Any, TYPE_CHECKING
from concurrent.futures import ThreadPoolExecutor
# Non Std Lib
import tqdm
# Local
from uie import utils
from uie.utils import _sbmsg

if TYPE_CHECKING:
    from uie.simulation import SimConfig, RunResult


Runner = Callable[["SimConfig"], "RunResult"]
Loader = Callable[[Dict[str, Any]], "RunResult"]


class Task:
    def __init__(self,
                 input_files: List[Any],
                 multiprocess: Optional[int] = None,
                 quiet: bool = False,
                 **options
                 ):
        """

        :param input_files: Inputs of the task, one unit of work each
        :param multiprocess: Number of threads to use (default = 1)
        :param quiet: Disables progress bars and messages
        :param options: Task specific options
        """
        self.input_files: List[Any] = input_files
        self._checked_files: Dict[Any, bool] = {}
        self.workers: int = multiprocess or 1
        self.quiet: bool = quiet

    def check(self) -> bool:
        raise NotImplementedError

    def process(self) -> bool:
        self.check()
        requires_processing = [
            file for file, status in self._checked_files.items()
            if not status
        ]
        if not len(requires_processing):
            if not self.quiet:
                utils.message("Nothing to process here.")
            return True
        return self._process(requires_processing)

    def _process(self, inputs: List[Any]) -> bool:
        raise NotImplementedError

    @property
    def output_files(self) -> List[str]:
        raise NotImplementedError


class SimulationBatchTask(Task):
    """ Runs one simulation per seed of `input_files`, all other settings coming from `config`

    With an `output_dir`, every run is stored as `<config hash>-seed<seed>.json` and runs already on disk are not
    computed again.

    :param config: Configuration shared by every run
    :param runner: Function running a single configuration
    :param loader: Function rebuilding a result from its stored document
    :param output_dir: Directory of the cached runs
    """
    def __init__(
            self,
            input_files: List[int],
            *args,
            config: "SimConfig",
            runner: Runner,
            loader: Optional[Loader] = None,
            output_dir: Optional[str] = None,
            **kwargs):
        super(SimulationBatchTask, self).__init__(input_files, *args, **kwargs)
        self.config: "SimConfig" = config
        self._runner: Runner = runner
        self._loader: Optional[Loader] = loader
        self._output_dir: Optional[str] = output_dir
        self._results: Dict[int, "RunResult"] = {}
        self._hash: str = utils.string_to_hash(
            {key: value for key, value in config.to_dict().items() if key != "seed"}
        )
        if self._output_dir and self._loader is None:
            raise ValueError("Cached runs require a loader")

    def rename_run(self, seed: int) -> Optional[str]:
        if not self._output_dir:
            return None
        return os.path.join(self._output_dir, f"{self._hash}-seed{seed}.json")

    @property
    def output_files(self) -> List[str]:
        if not self._output_dir:
            return []
        return [self.rename_run(seed) for seed in self.input_files]

    @property
    def results(self) -> List["RunResult"]:
        """ Results in the order of the seeds """
        return [self._results[seed] for seed in self.input_files if seed in self._results]

    def check(self) -> bool:
        all_done: bool = True
        for seed in self.input_files:
            out_file = self.rename_run(seed)
            if out_file and os.path.exists(out_file):
                self._results[seed] = self._loader(utils.read_json(out_file))
                self._checked_files[seed] = True
            else:
                self._checked_files[seed] = False
                all_done = False
        return all_done

    def _run(self, seed: int) -> int:
        result = self._runner(self.config.with_seed(seed))
        out_file = self.rename_run(seed)
        if out_file:
            utils.write_json(out_file, result.to_dict())
        self._results[seed] = result
        return seed

    def _process(self, inputs: List[int]) -> bool:
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            bar = tqdm.tqdm(total=len(inputs), desc=_sbmsg("Simulating..."), disable=self.quiet)
            for _ in executor.map(self._run, inputs):
                bar.update(1)
            bar.close()
        return True
