"""Registry of the eight prompt templates and the placeholder renderer.

Placeholders use ``{{name}}`` so literal braces in the prompt bodies never
collide with the substitution syntax. Rendering is pure string substitution;
for a fixed binding set the output is byte-identical across runs.
"""

from __future__ import annotations

import re

TEMPLATE_IDS = (
    "mod_generate_topics",
    "mod_is_expand",
    "mod_summarize",
    "persona_generate_arguments",
    "persona_relevance",
    "persona_present",
    "persona_respond",
    "persona_revise",
)


class RenderError(ValueError):
    """A placeholder in the template body has no binding."""


_PLACEHOLDER = re.compile(r"\{\{([a-z0-9_]+)\}\}")


MOD_GENERATE_TOPICS = """\
You are a fair and balanced moderator of a debate between two authors determining their respective novel contributions towards the following topic:

Topic: {{topic}}
Topic Description: {{topic_description}}

Here are the two papers and their claimed novel contributions with corresponding evidence:

Author 0 Paper Title: {{author_0_title}}
Author 0 Paper Abstract: {{author_0_abstract}}
{{author_0_contributions}}

Author 1 Paper Title: {{author_1_title}}
Author 1 Paper Abstract: {{author_1_abstract}}
{{author_1_contributions}}

Based on each of the author's claimed novelties, evidence, and counter-evidence to each other's arguments, you must determine the most meaningful, diverse set of subtopics within the parent topic, "{{topic}}", which best cover the types of contributions each of the papers make. Remember that for each of your selected topics, the papers will be debating which of them makes the better contribution towards the topic. Hence, for each of your subtopics, cite the integer IDs of any relevant contributions from Author 0 or Author 1. At least one of these lists should be non-empty. Overall, our goal is to identify how novel Author 0's paper's contributions towards topic "{{topic}}" are by individually considering their contributions towards your subtopics.

Output your list subtopics (up to {{k}}) in the following format:
    "topic_title": <should be a brief, 10-15 word string where the value is the title of your subtopic>,
    "topic_description": <1-2 sentence string explaining the subtopic and what you feel would be most helpful for the papers to debate within the subtopic>,
    "author_0_relevant_contributions": <list of integer IDs citing which contribution(s) from Author 0 would be most relevant to this subtopic; can be empty>,
    "author_1_relevant_contributions": <list of integer IDs citing which contribution(s) from Author 1 would be most relevant to this subtopic; can be empty>
"""

MOD_IS_EXPAND = """\
You are a moderator facilitating a debate in which two paper are debating who makes the better contribution towards the following topic:
Topic: {{topic}}
Topic Description: {{topic_description}}

{{conversation_history}}

Below, you are given the previous set of arguments and the current set of arguments.

previous arguments: {{previous_arguments}}

current arguments: {{current_arguments}}

You must determine whether progress is being made. DO NOT focus on the language being used. Focus on the content of the arguments. Specifically, determine the following (True or False for each):
1. progression_of_arguments: Are these arguments sufficiently different enough to necessitate further debate? Are there new, deeper concepts being discussed between the two sets of arguments?
2. meaningful_questions: Within the debate history, each author acknowledges each other's arguments and may ask clarifying questions accordingly. Do you believe that the clarifying questions have not been sufficiently addressed already and would be important to answer through further debate? If there are no questions raised in the debate history by either author, return False.
3. clear_winner: Do you believe that it is clear that one author has won the debate, and it does not need to be further deconstructured (in order to determine which components within each author's contributions are truly better)?

Output your argument in the following format:
    "explanation": <2-5 sentence string to explain your reasoning about whether further debate is necessary when comparing the previous arguments and the current arguments>,
    "progression_of_arguments": <output a boolean; pick only one of "True" or "False" depending on the history, arguments, and your explanation above>,
    "meaningful_questions": <output a boolean; pick only one of "True" or "False" depending on the history, arguments, and your explanation above>,
    "clear_winner": <output a boolean; pick only one of "True" or "False" depending on the history, arguments, and your explanation above>
"""

MOD_SUMMARIZE = """\
Two authors are debating their respective novelties with respect to the following topic:
Topic: {{topic}}
Author 0's paper title is: {{author_0_title}}
Author 1's paper title is: {{author_1_title}}

Here is a breakdown of their debates in tree format. At each tree node, we provide the "topic_title" : "topic description", Author 0's corresponding argument and Author 1's corresponding argument:

{{tree}}

Based on the debate breakdown, output a paragraph-long synthesis of the debate which summarizes the similarities and differences between the papers. Structure your summary with initially their similarities (which ideas/aspects overlap between the two papers?) to their differences (what makes the papers unique) in novelties. Focus more on the differences than the similarities.
"""

PERSONA_GENERATE_ARGUMENTS = """\
You are the author of the paper, '{{paper_title}}'. The abstract of your work is: {{paper_abstract}}.

You are debating another author on the novel contributions your work makes towards the following topic: {{topic}}.

Below is a list of relevant evidence retrieved from your paper: {{evidence}}. Based on the evidence, output a list of 1 to {{k}} DIVERSE, specific arguments for your position that are all supported by the evidence. Each argument should have a corresponding "argument_title", which is a brief statement of your argument (e.g., Better Efficiency for Training), a "description" explaining your argument and mentioning specific excerpts from your evidence pool, and finally, a list of all "evidence" IDs, which are the integers of the evidence in the input list, that best support your argument. For example, if Evidence #1 and #2 best support your argument, then evidence should be [1,2] (depending on your argument, this list can have more or less than two items). Each argument should make a unique point.

Output your list of arguments in the following format:
    "argument_title": <should be a brief, 10-15 word string where the value is the argument_title>,
    "description": <1-2 sentence string explaining the argument, including specific excerpts from the evidence pool>,
    "evidence": <list of integer IDs citing which evidence from the input list best support your argument>
"""

PERSONA_RELEVANCE = """\
Your objective is to check if a given evidence is relevant to a claim or not (relevancy means evidence that helps either support, refute, or clarify the given claim).

Claim: {{claim_title}}
Description of Claim: {{claim_description}}
Evidence: {{evidence}}.

Fill out the following schema:
"supports_claim": <"Yes"/"No" if the evidence supports the claim>,
"refutes_claim": <"Yes"/"No" if the evidence refutes the opposition's claim>
"clarifies_claim": <"Yes"/"No" if the evidence clarifies the claim>,
"irrelevant_to_claim": <"Yes"/"No" if the evidence is irrelevant to the claim>,
"""

_PERSONA_DEBATE_HEADER = """\
You are the author of the paper, '{{paper_title}}'. The abstract of your work is: {{paper_abstract}}.

You are debating another author (Opposition), whose work is titled, '{{opposition_title}}', and abstract is: {{opposition_abstract}}".
You are debating the other author on how and why your paper makes a better contribution towards the following topic:
Topic: {{topic}}
Topic Description: {{topic_description}}

Here are your claimed contributions towards the topic:
{{contributions}}
"""

PERSONA_PRESENT = _PERSONA_DEBATE_HEADER + """\

Given the above, make an argument for a specific reason why your contributions towards the topic, Topic: {{topic}}, are better than the opposition's. If you feel that you do not contribute to the given topic or your contributions ARE NOT better than the opposition's, then state so by conceding to the opposition (e.g., 'I do not believe my paper makes a better contribution than yours') and explain why.
"""

PERSONA_RESPOND = _PERSONA_DEBATE_HEADER + """\

Here is your conversation debate history with the opposition paper. You must respond to the last argument presented by your opposition in debate. A response may consist of (1) an acknowledgment of the opposition's previous response, (2) answering any of the questions about your paper brought up by the opposition, (3) asking any clarifying questions based on the opposition's claims and reasoning, (4) any clarifications of your own presented arguments based on the opposition, and/or (5) if you feel that the opposition's claim is strong and you do not have sufficient grounds to refute it, then a concession to your opposition.

conversation_history: {{conversation_history}}
"""

PERSONA_REVISE = _PERSONA_DEBATE_HEADER + """\

Based on the debate history and your/your opposition's arguments and evidence, you must construct a new, stronger argument related to the topic. This consists of an argument that addresses/is robust to any doubts or clarifying questions made by the opposition which you feel are valid. If based on the debate, you feel that you do not contribute to the given topic or your contributions ARE NOT better than the opposition's, then state so by conceding to the opposition (e.g., 'I do not believe my paper makes a better contribution than yours') and explain why.

conversation_history: {{conversation_history}}
"""

TEMPLATES: dict[str, str] = {
    "mod_generate_topics": MOD_GENERATE_TOPICS,
    "mod_is_expand": MOD_IS_EXPAND,
    "mod_summarize": MOD_SUMMARIZE,
    "persona_generate_arguments": PERSONA_GENERATE_ARGUMENTS,
    "persona_relevance": PERSONA_RELEVANCE,
    "persona_present": PERSONA_PRESENT,
    "persona_respond": PERSONA_RESPOND,
    "persona_revise": PERSONA_REVISE,
}


def template_body(template_id: str) -> str:
    if template_id not in TEMPLATES:
        raise KeyError(
            f"unknown template {template_id!r}; valid ids: {', '.join(TEMPLATE_IDS)}"
        )
    return TEMPLATES[template_id]


def placeholders(template_id: str) -> set[str]:
    """Placeholder names appearing in a template body."""
    return set(_PLACEHOLDER.findall(template_body(template_id)))


def render_prompt(template_id: str, bindings: dict[str, str]) -> str:
    """Substitute every placeholder; unbound names raise RenderError."""
    body = template_body(template_id)

    def _sub(match: re.Match[str]) -> str:
        name = match.group(1)
        if name not in bindings:
            raise RenderError(
                f"template {template_id!r}: unbound placeholder {name!r}"
            )
        return str(bindings[name])

    return _PLACEHOLDER.sub(_sub, body)
