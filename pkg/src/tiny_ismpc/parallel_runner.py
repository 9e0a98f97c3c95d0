"""
Parallel Task Runner
====================
독립 작업(격자점 LMI 풀이, 몬테카를로 시뮬레이션)을 병렬로 실행.
결과는 task id 로 돌려주고, 순서는 호출자가 다시 정한다.
"""

import concurrent.futures
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

logger = logging.getLogger(__name__)


@dataclass
class TaskResult:
    task_id: str
    success: bool
    result: Any
    error: Optional[str] = None
    exception: Optional[BaseException] = None


class ParallelRunner:
    def __init__(self, max_workers: int = 4):
        self.max_workers = max(1, int(max_workers))

    def run_tasks(self, tasks: Sequence[Dict[str, Any]], execute_fn: Callable) -> Dict[str, TaskResult]:
        """
        tasks: [{"id": "...", ...}]
        execute_fn: (task_dict) -> result
        """
        final_results: Dict[str, TaskResult] = {}
        if not tasks:
            return final_results

        # 워커 1개면 스레드 없이 순서대로 (디버깅/재현성)
        if self.max_workers == 1 or len(tasks) == 1:
            for task in tasks:
                final_results[task["id"]] = self._run_one(task, execute_fn)
            return final_results

        with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_task = {executor.submit(execute_fn, task): task for task in tasks}
            for future in concurrent.futures.as_completed(future_to_task):
                task = future_to_task[future]
                try:
                    data = future.result()
                    final_results[task["id"]] = TaskResult(task_id=task["id"], success=True, result=data)
                except Exception as exc:
                    logger.debug("task %s failed: %s", task["id"], exc)
                    final_results[task["id"]] = TaskResult(
                        task_id=task["id"],
                        success=False,
                        result=None,
                        error=str(exc),
                        exception=exc,
                    )
        return final_results

    def run_ordered(self, tasks: Sequence[Dict[str, Any]], execute_fn: Callable) -> List[TaskResult]:
        """run_tasks 결과를 입력 순서대로 정렬해서 반환"""
        results = self.run_tasks(tasks, execute_fn)
        return [results[task["id"]] for task in tasks]

    @staticmethod
    def _run_one(task: Dict[str, Any], execute_fn: Callable) -> TaskResult:
        try:
            return TaskResult(task_id=task["id"], success=True, result=execute_fn(task))
        except Exception as exc:
            logger.debug("task %s failed: %s", task["id"], exc)
            return TaskResult(task_id=task["id"], success=False, result=None, error=str(exc), exception=exc)
