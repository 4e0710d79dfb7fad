"""Text format for routed circuits: parser, printer, route checker and evaluator."""
from .ast import CircuitAST
from .checker import RouteCheckReport, Violation, check
from .evaluator import EvalError, evaluate
from .parser import ParseError, parse, parse_file
from .printer import to_text

__all__ = ["CircuitAST", "RouteCheckReport", "Violation", "check", "EvalError", "evaluate",
           "ParseError", "parse", "parse_file", "to_text"]
