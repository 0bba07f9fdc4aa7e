from django.db import models


class Architecture(models.TextChoices):
    FORENET_2D = "forenet2d", "ForeNet-2d"
    FORENET_3D = "forenet3d", "ForeNet-3d"
    CNN = "cnn", "CNN"
    LSTM = "lstm", "LSTM"
    CNN_LSTM = "cnn_lstm", "CNN-LSTM"
    CNN_AM = "cnn_am", "CNN-AM"
    LSTM_AM = "lstm_am", "LSTM-AM"
    CNN_M = "cnn_m", "CNN-M"
    LINEAR = "linear", "Linear"


THREE_D_ARCHITECTURES = frozenset({Architecture.FORENET_3D, Architecture.CNN_M})
