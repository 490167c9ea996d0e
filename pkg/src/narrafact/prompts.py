"""Prompt templates for every model-facing pipeline stage.

The knowledge-extraction prompt is one-shot: a worked example teaches the
output grammar (a "Named entities:" block of slash-joined alias lines and a
numbered "Knowledge graph edges:" block of `subject; predicate; object`
lines, where a line without an object states a character's own condition).
"""

from __future__ import annotations

KNOWLEDGE_EXTRACTION_PROMPT = """\
[Begin story excerpt]
"Christmas won't be Christmas without any presents," grumbled Jo. "It's so
dreadful to be poor!" sighed Meg, looking out the window at the snow-covered
streets of Concord. "I don't think it's fair for some girls to have plenty of
pretty things, and other girls nothing at all," added little Amy. "We've got
Father and Mother, and each other," said Beth contentedly from her corner.
The four young faces brightened, but darkened again as Jo said sadly, "We
haven't got Father, and shall not have him for a long time." He was far away,
where the fighting was, serving with the Union Army. "Glad to find you so
merry, my girls," said a cheery voice at the door, and the girls turned to
welcome Mrs. March, whom they called Marmee. "A letter! A letter! Three
cheers for Father!" cried Jo, as Mother held it up.
[End story excerpt]

Named entities:
Jo / Jo March
Meg / Margaret / Margaret March
Amy
Beth / Elizabeth
March sisters
Mrs. March / Marmee / Mother
Father
Concord
Union Army

Knowledge graph edges:
1. Jo, Meg, Amy, Beth; in; March sisters
2. March sisters; daughters of; Mrs. March
3. Mrs. March; mother of; March sisters
4. Jo; grumbled about; Christmas
5. Meg; sighed about being poor
6. Meg; lives in; Concord
7. Amy; complained about unfairness
8. Beth; content with family
9. Father; away at war
10. Father; serves in; Union Army
11. Jo; misses; Father
12. Mrs. March; called; Marmee
13. March sisters; welcomed; Mrs. March
14. Jo; cheered for; Father
15. Mrs. March; brought home a letter from; Father

[Begin story excerpt]
{scene}
[End story excerpt]
"""

CHUNK_SUMMARY_PROMPT = """\
This is a part of a script from a Movie. Read the following content carefully, then answer my question:
{chunk}
The script has ended now.

Summary instructions:
- Provide a detailed summary of the key characters' actions, emotions, and situations as reflected in the dialogue or context.
- Clearly state the outcome of the events.
- The summary should be between 2 to 5 sentences long.
"""

FACT_DECOMPOSITION_PROMPT = """\
I will give you a summary from a chunk of movie script.
Your task is to provide me with a list of atomic facts expressed in the given summary.
Each atomic fact should be described in a name-only third-person format.
Please separate each atomic fact with a `\\n`.
Summary: {sentence}
"""

FACT_CHECK_PROMPT = """\
Consider the given statement, the related scene, and the relationship subgraph.
Indicate whether the statement is supported by the scene and the relationship subgraph.
Negation of a false statement should be considered supported.
If the statement is true, output 1.
If the statement is false, output the reason why it is false.
Scene: {scene}
Relationship Subgraph: {subgraph}
Statement: {statement}
Output:
"""

# Variant used when factuality is judged from the scene alone.
FACT_CHECK_PROMPT_NO_GRAPH = """\
Consider the given statement and the related scene.
Indicate whether the statement is supported by the scene.
Negation of a false statement should be considered supported.
If the statement is true, output 1.
If the statement is false, output the reason why it is false.
Scene: {scene}
Statement: {statement}
Output:
"""

REFINEMENT_PROMPT = """\
Below is a part of the script from the titled movie.
- Script: {script}
Based on the 'Statement to Revise' and 'Reason for Revision', create a 'Revised Summary' of the 'Summary of the Script'.
Keep the revised summary concise and similar in length to the original summary.
Do not directly copy any part of the 'Script.'
If the 'Summary of the Script' is accurate, generate the original summary as is.
- Summary of the Script: {summary}
{statements}
- Revised Summary:
"""

PERTURBATION_PROMPT = """\
This sentence serves as a summary of a script. Rewrite this one-sentence summary by minimally replacing a few words in the original sentence to render it factually inaccurate, while keeping the original sentence structure intact.

Original sentence: {sentence}
Rewritten sentence:
"""


def render_revision_statements(flagged: list[tuple[str, str]]) -> str:
    """Format flagged (fact, feedback) pairs as numbered revision lines."""
    lines = [
        f"- Statement to Revise {i}: {fact} (Reason for Revision: {feedback})"
        for i, (fact, feedback) in enumerate(flagged, start=1)
    ]
    return "\n".join(lines)
