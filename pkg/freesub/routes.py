from flask import Blueprint, jsonify, request, current_app
from freesub.actions import orbit_size
from freesub.constructions import (
    conjugate_subgroup, hall_completion, intersect, join, shrink_to_infinite_join,
    small_cancellation_witness, verify_log,
)
from freesub.errors import ParseError, PreconditionError
from freesub.stallings import (
    accepting_path, basis, deficit_vertices, from_generators, handle, index_in_free_group, rank,
    serialize,
)
from freesub.words import Alphabet, format_word, parse_word

main = Blueprint('main', __name__)

# ============================================
# Health & Info Routes
# ============================================

@main.route('/')
def index():
    return jsonify({"message": "Free group subgroup service"})

@main.route('/health')
def health():
    return jsonify({"status": "healthy"})

# ============================================
# Helper Functions
# ============================================

class MissingField(ParseError):
    pass


def get_payload():
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise MissingField('request body must be a JSON object')
    return data


def get_alphabet(data):
    letters = data.get('alphabet')
    if not letters:
        raise MissingField('alphabet is required')
    if isinstance(letters, str):
        return Alphabet.parse(letters)
    if not isinstance(letters, list) or not all(isinstance(name, str) for name in letters):
        raise MissingField('alphabet must be a string or a list of names')
    try:
        return Alphabet(tuple(letters))
    except PreconditionError as e:
        raise ParseError(f'bad alphabet: {e}') from e


def get_word(text, alphabet):
    if not isinstance(text, str):
        raise MissingField('words must be strings')
    if len(text) > current_app.config['MAX_REQUEST_WORD']:
        raise ParseError(f"word longer than {current_app.config['MAX_REQUEST_WORD']} characters")
    return parse_word(text, alphabet)


def get_words(data, alphabet, key, required=True):
    if key not in data:
        if required:
            raise MissingField(f'{key} is required')
        return []
    if not isinstance(data[key], list):
        raise MissingField(f'{key} must be a list of words')
    return [get_word(w, alphabet) for w in data[key]]


def get_subgroup(data, alphabet, key='generators'):
    return from_generators(alphabet, get_words(data, alphabet, key))


def describe(H):
    p = handle(H)
    return {
        'core': serialize(H),
        'vertices': H.graph.vertex_count,
        'edges': H.graph.edge_count,
        'rank': rank(H),
        'index': str(index_in_free_group(H)),
        'basis': [format_word(w, H.alphabet) for w in basis(H)],
        'handle': format_word(p.label, H.alphabet),
        'deficit': deficit_vertices(H).total,
    }


def audit(log):
    report = log.to_dict()
    report['problems'] = verify_log(log)
    return report

# ============================================
# Single Subgroup Routes
# ============================================

@main.route('/api/core', methods=['POST'])
def core():
    data = get_payload()
    alphabet = get_alphabet(data)
    return jsonify(describe(get_subgroup(data, alphabet))), 200

@main.route('/api/member', methods=['POST'])
def member():
    data = get_payload()
    alphabet = get_alphabet(data)
    H = get_subgroup(data, alphabet)
    if 'word' not in data:
        return jsonify({'error': 'word is required'}), 400
    path = accepting_path(H, get_word(data['word'], alphabet))
    return jsonify({'member': path is not None, 'path': list(path) if path else None}), 200

@main.route('/api/index', methods=['POST'])
def subgroup_index():
    data = get_payload()
    alphabet = get_alphabet(data)
    return jsonify({'index': str(index_in_free_group(get_subgroup(data, alphabet)))}), 200

@main.route('/api/conjugate', methods=['POST'])
def conjugate():
    data = get_payload()
    alphabet = get_alphabet(data)
    g = get_word(data.get('g', ''), alphabet)
    return jsonify(describe(conjugate_subgroup(get_subgroup(data, alphabet), g))), 200

@main.route('/api/hall', methods=['POST'])
def hall():
    data = get_payload()
    alphabet = get_alphabet(data)
    exclude = get_words(data, alphabet, 'exclude', required=False)
    return jsonify(describe(hall_completion(get_subgroup(data, alphabet), exclude))), 200

# ============================================
# Two Subgroup Routes
# ============================================

@main.route('/api/intersect', methods=['POST'])
def intersect_route():
    data = get_payload()
    alphabet = get_alphabet(data)
    A, B = get_subgroup(data, alphabet, 'a'), get_subgroup(data, alphabet, 'b')
    return jsonify(describe(intersect(A, B))), 200

@main.route('/api/join', methods=['POST'])
def join_route():
    data = get_payload()
    alphabet = get_alphabet(data)
    A, B = get_subgroup(data, alphabet, 'a'), get_subgroup(data, alphabet, 'b')
    return jsonify(describe(join(A, B))), 200

@main.route('/api/shrink', methods=['POST'])
def shrink():
    """H of finite index in b whose join with a has infinite index and avoids exclude."""
    data = get_payload()
    alphabet = get_alphabet(data)
    A, B = get_subgroup(data, alphabet, 'a'), get_subgroup(data, alphabet, 'b')
    exclude = get_words(data, alphabet, 'exclude', required=False)
    result = shrink_to_infinite_join(A, B, exclude)
    return jsonify({
        'H': describe(result.H),
        'join': describe(result.join),
        'audit': audit(result.log),
    }), 200

@main.route('/api/orbit', methods=['POST'])
def orbit():
    data = get_payload()
    alphabet = get_alphabet(data)
    R, L = get_subgroup(data, alphabet, 'r'), get_subgroup(data, alphabet, 'l')
    g = get_word(data.get('g', ''), alphabet)
    return jsonify({'orbit': str(orbit_size(R, L, g))}), 200

@main.route('/api/smallcancel', methods=['POST'])
def smallcancel():
    data = get_payload()
    alphabet = get_alphabet(data)
    if 'word' not in data:
        return jsonify({'error': 'word is required'}), 400
    result = small_cancellation_witness(alphabet, get_word(data['word'], alphabet))
    return jsonify({
        'H': describe(result.subgroup),
        'blocks': result.blocks,
        'u_lengths': [len(u) for u in result.u_words],
        'audit': audit(result.log),
    }), 200
