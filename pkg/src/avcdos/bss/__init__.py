"""BSS machine model: program DSL, exact interpreter, and a symmetrizability compiler."""
