"""Serve the JSON API: `python run.py [PORT]`."""
import logging
import sys

from freesub import create_app

app = create_app()
logger = logging.getLogger('freesub.run')


def bind_address(argv):
    port = int(argv[1]) if len(argv) > 1 else app.config['PORT']
    return app.config['HOST'], port


if __name__ == '__main__':
    host, port = bind_address(sys.argv)
    logger.info('subgroup API on http://%s:%d (caps: %d core vertices, %d stages)',
                host, port, app.config['MAX_CORE_VERTICES'], app.config['MAX_STAGES'])
    app.run(host=host, port=port, debug=app.config['DEBUG'])
