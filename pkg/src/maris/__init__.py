"""maris: knowledge services for a maritime document corpus.

Subpackages are organized by pipeline stage: ingestion (`datalake`),
lexical retrieval (`retriever`), online reasoners (`qa`, `nl2sql`,
`controller`), offline harvesters (`kg`, `topics`, `summarizer`,
`paraphrase`), and the data-to-text `reporter`.
"""

__version__ = "0.1.0"
