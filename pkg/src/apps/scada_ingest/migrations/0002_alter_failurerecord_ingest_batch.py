from django.db import migrations, models


class Migration(migrations.Migration):

    dependencies = [
        ('scada_ingest', '0001_initial'),
    ]

    operations = [
        migrations.AlterField(
            model_name='failurerecord',
            name='ingest_batch',
            field=models.TextField(),
        ),
    ]
