from flask import Flask, jsonify
from freesub.config import Config
from freesub.errors import FreesubError
import logging

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


# Expected client errors (422 precondition violations) are answered with a JSON
# error body; keep them out of the access log
class SuppressExpectedClientErrors(logging.Filter):
    def filter(self, record):
        message = record.getMessage()
        # Werkzeug logs format: "POST /api/shrink HTTP/1.1" 422
        if '" 422' in message and '/api/' in message:
            return False
        return True


def configure_logging(level='INFO'):
    """Set the root format and level once; later calls only change the level."""
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(format=LOG_FORMAT)
    root.setLevel(str(level).upper())


def create_app(config_class=Config):
    app = Flask(__name__)
    app.config.from_object(config_class)

    configure_logging(app.config['LOG_LEVEL'])

    werkzeug_logger = logging.getLogger('werkzeug')
    werkzeug_logger.addFilter(SuppressExpectedClientErrors())

    @app.errorhandler(FreesubError)
    def handle_freesub_error(e):
        return jsonify({'error': str(e)}), e.status_code

    from freesub.routes import main
    app.register_blueprint(main)

    return app
