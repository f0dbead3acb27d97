"""Prompt catalog.

Each entry is a template with named ``{placeholders}``. Templates are rendered
with :func:`render`; a missing placeholder is an error (requests must be fully
filled before they reach a provider).
"""

import string

PROMPTS: dict[str, str] = {
    # intent classification (router)
    "parse_query": """\
You are a helpful assistant that classifies the user's query and generates an optimized query content.
When there's ambiguity in the user's query, use the chat history to infer the user's intention.
Ensure the query content is clear and can be executed without seeing the chat history.

There are three types of user's query:
1. Information Retrieval Queries:
   - Examples: "What is the definition of X?", "Is X the best player in the world?"
   - Generate query category: "search"
   - Generate query content: Preserve the original query without modifying meaning
2. Graph Editing Commands:
   - Examples: "Add a new concept called 'X' under the concept 'Y'"
   - Generate query category: "edit"
   - Generate query content: Preserve the original command without modification
3. Expansion Requests:
   - Examples: "Tell me more about X", "Explain X in more detail", "Elaborate on X"
   - Generate query category: "expansion"
   - Generate query content: "What are the sub-topics covered in the document related to 'X'?"

Answer in exactly two lines:
category: <search|edit|expansion>
content: <optimized query content>

User: {query}
Context: {chat_history}
""",
    # graph update after an answered query
    "update_graph": """\
User's question: {query}
Answer: {response}

Update the graph based on the question and answer:

1. Create a new node for the answer if the answer does not fit under any existing node.
   Link the new node to the existing nodes that are related to the answer.
   Consider both the node name and description when identifying related existing nodes.
   For example, if the user asks "What is the definition of XXX?", check if there's a node
   with the name "XXX" or a description containing "XXX".

2. Break down the user's question and the answer into key points.

3. Maintain hierarchy: general key points as parent nodes, specific details as child nodes.

4. For each key point:
   a. Identify the relevant nodes in the graph related to the key point.
   b. If the key point is a sub-topic of an existing node, add it as a child node.
   c. If the key point is a parent-topic of an existing node, add it as a parent node.

Remember: You're creating a hierarchical knowledge graph, not a flat list.

Existing nodes: {existing_nodes}

Output one operation per line in this exact form (quoted arguments, no extra text):
AddNode("title", "detail", "parent title or id or empty", "edge label")
AddEdge("parent", "child", "label")
""",
    # answering from the graph alone
    "query_graph": """\
You are an assistant for question-answering tasks. You will be given a question and a context.
Use ONLY the following pieces of retrieved context to answer the question.
If you lack sufficient information from the context, respond with 'I don't know'.
Do not fabricate or assume any information not present in the context.

Your answer should resemble a hierarchical map, describing the relationships between each topic and the central keyword of the user's input.
For each topic, explain how it is related to the central keyword, using specific information from the context.

The context is: {context}
""",
    # query rewriting for the knowledge-base retriever
    "refine_query": """\
You are an intelligent query refiner. Your task is to analyze the user's original query and the response from the graph retriever, then generate a refined query for the RAG retriever.

Guidelines:
1. Focus on the parts of the query that cannot be answered by the graph.
2. Make the refined query more specific and targeted.
3. Remove any parts of the query that can already be answered by the graph.
4. Ensure the refined query is clear and self-contained.
5. If the entire query can be answered by the graph, generate a minimal query to confirm or expand on the information.
Directly output the refined query, do not output any other text.

Original query: {original_query}
Graph retriever response: {graph_response}
""",
    # grounded synthesis over retrieved chunks
    "query_kb": """\
You are an assistant for question-answering tasks. You will be given a question and a context.
Use ONLY the following pieces of retrieved context to answer the question.
If you lack sufficient information from the context, respond with 'I don't know'.
Do not fabricate or assume any information not present in the context.
Your answer should resemble a mind map, describing the relationships between each topic and the central keyword of the user's input.
For each topic, explain how it is related to the central keyword, using specific information from the context.
Cite the context passages you use with their bracketed numbers, e.g. [1].

The question is: {question}
The context is: {context}
""",
    # node expansion suggestions
    "suggest": """\
You are an intelligent agent responsible for generating suggestions for expanding a knowledge graph. Your task is to determine the most logical relationships between potential new content and one specific existing node.

1. Read the given existing node content carefully and understand the context.
2. Based on your knowledge and the context of the existing node, generate relevant suggestions for expansion.
3. Review the existing suggestions of the current node and do not suggest the same topic twice.
4. Determine the most appropriate relationship between the new content and the existing node.
5. Provide a list of suggestions, where each suggestion includes:
   - A topic that could be added as a child of the current node
   - A brief description of that topic as a full, informative sentence
   - The relationship between the new content and the existing node

Ensure that:
1. The suggestions are directly related to the existing node with a logical relationship.
2. Only include content that directly fits as children of the current node.
3. If you don't have any suggestions, just return an empty list.
4. Aim to provide 3-5 relevant and diverse suggestions for expanding the graph, DO NOT EXCEED 5.
5. The description should be a complete, informative sentence that addresses specific aspects or examples related to the topic.

Example of a good description:
Topic: 'Applications of Machine Ethics'
Description: 'Machine ethics is applied in various real-world scenarios, including autonomous vehicles making moral decisions in potential accident situations, AI systems in healthcare prioritizing patient care, and military AI navigating complex ethical dilemmas in combat situations.'

Output one suggestion per line as: topic | description | relationship
(an empty output means no suggestions)

Existing nodes on the graph: {existing_nodes}
Expanding from node: {node_info}
Existing suggestions: {existing_suggestions}
Related content in the docs: {content}
""",
    # final chat-message rewriting
    "rewrite_final": """\
User's input: {input}
Refined query based on the input: {query}

Your task is to rewrite the following answer: {answer} such that the response answers both the user's input and the refined query.
After the final answer, add a reference section that lists the sources of the answer: {sources}
After the reference section, add a note to the user that the question is asked specifically on the node {node_name}

Rewriting guidelines:
1. Improve readability without modifying the content of the original answer.
2. The final answer should answer the user's input and the refined query.
3. Keep the answer concise and to the point.
4. Improve formatting for clarity if possible.
5. The final answer should introduce the main themes directly. Do not have text "High-level summary" or "Detailed bullet points" in the final answer.
""",
    # cluster summarization for the hierarchical index
    "summarize": """\
Summarize the following passages in 120 words or fewer. Capture the shared
topic and the most important specifics.

{passages}
""",
    # relevance grading of retrieved chunks
    "grade": """\
You judge whether retrieved text chunks are relevant to a query.
For each numbered chunk below, output exactly one line containing only
"relevant" or "irrelevant", in the same order as the chunks.

Query: {query}

Chunks:
{chunks}
""",
    # contribution planning (edit commands -> graph operations)
    "plan_ops": """\
You translate a user's graph-editing request into a sequence of operations on
a knowledge graph. Analyze the current graph state and produce the operations
that achieve the user's objective.

Available operations, one per line, arguments double-quoted:
AddNode("title", "detail", "parent title or id or empty", "edge label")
AddEdge("parent", "child", "label")
DeleteNode("node", "detach|cascade")
DeleteEdge("parent", "child")
UpdateNode("node", "field", "value")

Nodes may be referenced by id or by title. When a reference is ambiguous,
use the best-matching existing node. Lines starting with # are treated as
rationale. Output operations only, no other prose.

Current graph:
{graph_state}

Conversation history:
{history}

User request: {request}
""",
    # rewrite a failing operation using its error message
    "self_correct": """\
A graph operation failed. Rewrite it as a single corrected operation line in
the same quoted-argument syntax. Output exactly one operation line and
nothing else.

Failed operation: {op}
Error: {error}

Conversation history:
{history}
""",
}


class _Formatter(string.Formatter):
    def get_value(self, key, args, kwargs):
        if key not in kwargs:
            raise KeyError(f"unfilled placeholder: {key}")
        return kwargs[key]


_formatter = _Formatter()


def render(template_id: str, **values) -> str:
    """Fill a catalog template; raises KeyError on unknown ids or unfilled slots."""
    if template_id not in PROMPTS:
        raise KeyError(f"unknown prompt template: {template_id}")
    return _formatter.vformat(PROMPTS[template_id], (), values)
