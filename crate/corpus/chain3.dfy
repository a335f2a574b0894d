method chain3(x: int) returns (r: int)
  ensures r == 2 * x - 1
{
  var t := x + 1;
  var u := t * 2;
  r := u - 3;
}
