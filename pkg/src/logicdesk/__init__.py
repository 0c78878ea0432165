"""logicdesk: a desk-scale web workbench for a small logic language.

Library layers:

- `reader` / `ops`: tokenizer and operator-precedence parser
- `terms` / `writer`: the term model and writeq-style output
- `engine` / `builtins`: resolution engine with budgets and a 4-port tracer
- `sandbox`: static safety analysis of directives and queries
- `highlight` / `docs`: semantic tokens, hover info and templates
- `store`: SHA-1 content-addressed version store with named heads
- `render`: answer-term renderers (prolog, table, chess, ...)
- `server` / `sessions`: the HTTP application tying it all together
"""

__version__ = "0.1.0"
