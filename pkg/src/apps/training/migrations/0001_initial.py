import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies: list[tuple[str, str]] = []

    operations = [
        migrations.CreateModel(
            name='TrainingRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('target_tag', models.PositiveIntegerField()),
                ('architecture', models.CharField(choices=[('forenet2d', 'ForeNet-2d'), ('forenet3d', 'ForeNet-3d'), ('cnn', 'CNN'), ('lstm', 'LSTM'), ('cnn_lstm', 'CNN-LSTM'), ('cnn_am', 'CNN-AM'), ('lstm_am', 'LSTM-AM'), ('cnn_m', 'CNN-M'), ('linear', 'Linear')], max_length=16)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('running', 'Running'), ('completed', 'Completed'), ('failed', 'Failed'), ('diverged', 'Diverged')], default='pending', max_length=16)),
                ('seed', models.BigIntegerField(default=0)),
                ('data_dir', models.CharField(max_length=500)),
                ('run_dir', models.CharField(blank=True, max_length=500)),
                ('config', models.JSONField(blank=True, default=dict)),
                ('best_epoch', models.PositiveIntegerField(blank=True, null=True)),
                ('best_dk_logs', models.IntegerField(blank=True, null=True)),
                ('qualified_epochs', models.PositiveIntegerField(default=0)),
                ('checkpoint_path', models.CharField(blank=True, max_length=500)),
                ('error_message', models.TextField(blank=True)),
                ('started_at', models.DateTimeField(blank=True, null=True)),
                ('completed_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'get_latest_by': 'created_at',
                'indexes': [models.Index(fields=['target_tag', 'architecture'], name='training_run_target_idx'), models.Index(fields=['status', 'created_at'], name='training_run_status_idx')],
            },
        ),
        migrations.CreateModel(
            name='TrainingEpoch',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('epoch', models.PositiveIntegerField()),
                ('train_rmse', models.FloatField()),
                ('test_rmse', models.FloatField(blank=True, null=True)),
                ('test_dk_logs', models.IntegerField(blank=True, null=True)),
                ('qualified', models.BooleanField(default=False)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='epochs', to='training.trainingrun')),
            ],
            options={
                'ordering': ('run', 'epoch'),
                'constraints': [models.UniqueConstraint(fields=('run', 'epoch'), name='unique_epoch_per_training_run')],
            },
        ),
    ]
