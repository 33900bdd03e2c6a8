"""
Base class of the command tools: a pydantic model whose fields are the command's
arguments and whose run() performs it and returns a JSON summary.
"""
from __future__ import annotations

import json
from abc import abstractmethod
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from harness.experiment import ExperimentConfig


class CommandTool(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    out: Optional[str] = Field(None, description="Output path; stdout when omitted or '-'.")

    @abstractmethod
    def run(self) -> str:
        ...

    @staticmethod
    def summary(**fields) -> str:
        return json.dumps(fields, sort_keys=True)


class ConfiguredTool(CommandTool):
    """A command that works on an experiment configuration"""
    config: ExperimentConfig = Field(..., description="Validated experiment configuration.")
