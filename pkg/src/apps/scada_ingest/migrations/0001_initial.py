from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies: list[tuple[str, str]] = []

    operations = [
        migrations.CreateModel(
            name='FailureRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('ingest_batch', models.CharField(max_length=128)),
                ('failure_tag', models.PositiveIntegerField()),
                ('turbine_tag', models.CharField(max_length=32)),
                ('component', models.CharField(choices=[('transformer', 'Transformer'), ('hydraulic_group', 'Hydraulic group'), ('gearbox', 'Gearbox'), ('generator_bearing', 'Generator bearing'), ('generator', 'Generator'), ('other', 'Other')], default='other', max_length=32)),
                ('component_detail', models.CharField(blank=True, max_length=128)),
                ('remarks', models.TextField(blank=True)),
                ('failed_at', models.DateTimeField()),
                ('n_logs', models.PositiveIntegerField(default=0)),
                ('is_valid', models.BooleanField(default=False)),
                ('dataset_dir', models.CharField(blank=True, max_length=500)),
            ],
            options={
                'get_latest_by': 'created_at',
                'indexes': [models.Index(fields=['turbine_tag', 'failed_at'], name='failure_turbine_time_idx'), models.Index(fields=['is_valid', 'component'], name='failure_valid_component_idx')],
                'constraints': [models.UniqueConstraint(fields=('ingest_batch', 'failure_tag'), name='unique_failure_tag_per_ingest_batch')],
            },
        ),
    ]
