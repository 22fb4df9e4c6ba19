import os
from dotenv import load_dotenv

load_dotenv()

class Config:
    # Flask Configuration
    ENV = os.environ.get('FLASK_ENV', 'development')
    DEBUG = os.environ.get('FLASK_DEBUG', 'True').lower() in ('true', '1', 't')

    # Server Configuration
    HOST = os.environ.get('FLASK_HOST', '127.0.0.1')
    PORT = int(os.environ.get('FLASK_PORT', 5000))

    # Logging
    LOG_LEVEL = os.environ.get('FREESUB_LOG_LEVEL', 'INFO').upper()

    # Resource caps
    MAX_CORE_VERTICES = int(os.environ.get('FREESUB_MAX_CORE_VERTICES', 200000))
    MAX_STAGES = int(os.environ.get('FREESUB_MAX_STAGES', 64))
    MAX_REQUEST_WORD = int(os.environ.get('FREESUB_MAX_REQUEST_WORD', 20000))

    # Construction defaults
    ENUM_BUDGET = int(os.environ.get('FREESUB_ENUM_BUDGET', 4))
    COVER_INDEX = int(os.environ.get('FREESUB_COVER_INDEX', 2))
    SMALLCANCEL_MAX_BLOCKS = int(os.environ.get('FREESUB_SMALLCANCEL_MAX_BLOCKS', 400))
    BALL_RADIUS = int(os.environ.get('FREESUB_BALL_RADIUS', 6))
