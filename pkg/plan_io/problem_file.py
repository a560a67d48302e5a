import logging

from pydantic import BaseModel, ConfigDict, Field, model_validator

from mobilization_domain.model import EnterpriseEnvironment, MobilizationTask
from plan_io.documents import DocumentError, decode, load_json, validate_document


logger = logging.getLogger(__name__)


class ProblemFileError(DocumentError):
    """Raised when a problem document is malformed or does not fit its domain."""


class ProblemFile(BaseModel):
    """Goal tasks in the order written, plus optional stock overrides."""

    model_config = ConfigDict(extra='forbid')

    tasks: list[MobilizationTask] = Field(default_factory=list)
    material_stock: dict[str, float] = Field(default_factory=dict)

    @model_validator(mode='after')
    def _unique_task_ids(self) -> 'ProblemFile':
        seen = set()
        for task in self.tasks:
            if task.task_id in seen:
                raise ValueError(f'duplicate task id {task.task_id}')
            seen.add(task.task_id)
        return self

    def bind(self, env: EnterpriseEnvironment, *, source: str = '<problem>') -> EnterpriseEnvironment:
        """Apply the stock overrides and check every task against `env`."""
        try:
            bound = env.with_stock(self.material_stock) if self.material_stock else env
            for task in self.tasks:
                task.check_against(bound)
        except ValueError as e:
            raise ProblemFileError(str(e), source=source) from e
        return bound


def parse_problem(data: bytes | str, *, source: str = '<problem>') -> ProblemFile:
    text = decode(data, source, ProblemFileError)
    problem = validate_document(ProblemFile, load_json(text, source, ProblemFileError), text, source, ProblemFileError)
    logger.info('--- 📋 Loaded %s: %d tasks ---', source, len(problem.tasks))
    return problem
