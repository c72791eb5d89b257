"""
Report Rendering Service - Single Responsibility: Turn command results into JSON documents, tables and CSV files
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Mapping, Optional, TextIO
import json
import sys

import pandas as pd


SCHEMA_VERSION = "1.0"


class OutputFormat(Enum):
    """Report output formats"""
    JSON = "json"
    TABLE = "table"


@dataclass
class CommandResult:
    """
    Outcome of one CLI command

    ``payload`` is a domain report (anything with export_to_dict) or a plain
    dictionary; ``frame`` is the tabular view written by --csv.
    """
    kind: str
    payload: Any
    exit_code: int = 0
    summary: str = ""
    frame: Optional[pd.DataFrame] = None
    artifacts: Dict[str, str] = field(default_factory=dict)

    def payload_dict(self) -> Dict[str, Any]:
        if hasattr(self.payload, "export_to_dict"):
            return self.payload.export_to_dict()
        return dict(self.payload)

    def display_text(self) -> str:
        if hasattr(self.payload, "format_for_display"):
            return self.payload.format_for_display()
        return json.dumps(self.payload_dict(), indent=2, ensure_ascii=False)


class IReportRenderingService(ABC):
    """Interface for report output"""

    @abstractmethod
    def build_document(self, result: CommandResult, run_config: Mapping[str, Any]) -> Dict[str, Any]:
        """Versioned JSON document embedding the run configuration"""
        pass

    @abstractmethod
    def emit(self, result: CommandResult, run_config: Mapping[str, Any], output_path: Optional[str] = None) -> str:
        """Write the report to a file or the output stream; returns the text"""
        pass

    @abstractmethod
    def display_error(self, message: str, suggestion: Optional[str] = None) -> None:
        """Show a diagnostic on the error stream"""
        pass


class CLIReportRenderingService(IReportRenderingService):
    """Console and file rendering"""

    def __init__(
        self,
        output_format: OutputFormat = OutputFormat.JSON,
        stream: Optional[TextIO] = None,
        error_stream: Optional[TextIO] = None
    ):
        """
        Initialize report rendering service

        Args:
            output_format: json documents or human-readable tables
            stream: report stream (stdout when omitted)
            error_stream: diagnostics stream (stderr when omitted)
        """
        self._output_format = OutputFormat(output_format)
        self._stream = stream
        self._error_stream = error_stream

    @property
    def output_format(self) -> OutputFormat:
        return self._output_format

    def build_document(self, result: CommandResult, run_config: Mapping[str, Any]) -> Dict[str, Any]:
        document: Dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "kind": result.kind,
            "exit_code": result.exit_code,
            "run_config": dict(run_config),
            "result": result.payload_dict(),
        }
        if result.artifacts:
            document["artifacts"] = dict(result.artifacts)
        return document

    def render(self, result: CommandResult, run_config: Mapping[str, Any]) -> str:
        if self._output_format == OutputFormat.TABLE:
            lines = [result.display_text()]
            if result.summary:
                lines.append(f"\n📋 {result.summary}")
            for name, path in sorted(result.artifacts.items()):
                lines.append(f"💾 {name}: {path}")
            return "\n".join(lines) + "\n"
        return json.dumps(self.build_document(result, run_config), indent=2, ensure_ascii=False) + "\n"

    def emit(self, result: CommandResult, run_config: Mapping[str, Any], output_path: Optional[str] = None) -> str:
        """Files always receive the JSON document; the stream gets the chosen format"""
        text = self.render(result, run_config)
        if output_path:
            document = json.dumps(self.build_document(result, run_config), indent=2, ensure_ascii=False) + "\n"
            with open(output_path, 'w', encoding='utf-8') as handle:
                handle.write(document)
            if self._output_format == OutputFormat.JSON:
                return document
        (self._stream or sys.stdout).write(text)
        return text

    def write_csv(self, result: CommandResult, path: str) -> None:
        frame = result.frame
        if frame is None and hasattr(result.payload, "to_frame"):
            frame = result.payload.to_frame()
        if frame is None:
            frame = pd.json_normalize(result.payload_dict())
        frame.to_csv(path, index=False)

    def display_error(self, message: str, suggestion: Optional[str] = None) -> None:
        stream = self._error_stream or sys.stderr
        stream.write(f"{message}\n" if message.startswith("❌") else f"❌ Erro: {message}\n")
        if suggestion:
            stream.write(f"💡 Sugestão: {suggestion}\n")


class ReportRenderingFactory:
    """Factory for creating report rendering services"""

    @staticmethod
    def create_service(service_type: str = "cli", **kwargs) -> IReportRenderingService:
        """Create report rendering service based on type"""
        if service_type.lower() == "cli":
            return CLIReportRenderingService(**kwargs)
        else:
            raise ValueError(f"Unsupported report rendering service type: {service_type}")
